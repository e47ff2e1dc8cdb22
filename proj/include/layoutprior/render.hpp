// SPDX-License-Identifier: Apache-2.0
//
// Standalone SVG drawing of one layout: canvas rectangle, one outlined box
// per component and its class name. Colors come from a fixed palette indexed
// by a hash of the class name, so a class keeps its color across corpora.
#pragma once

#include <string>
#include <string_view>

#include "layoutprior/types.hpp"

namespace layoutprior {

/// "#rrggbb" from the fixed palette.
std::string class_color(std::string_view class_name);

std::string render_svg(const LayoutDocument& layout, const ClassVocabulary& vocabulary);

}  // namespace layoutprior
