// SPDX-License-Identifier: Apache-2.0
#include "layoutprior/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"
#include "layoutprior/error.hpp"
#include "layoutprior/file_io.hpp"

namespace layoutprior {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix " + shape() + " needs " + std::to_string(rows_ * cols_) +
                     " entries, got " + std::to_string(data_.size()));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw ValidationError("matrix " + shape() + " has a non-finite entry");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::string Matrix::shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + a.shape() + " x " + b.shape() + " inner dimensions differ");
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto src = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += aik * src[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out(c, r) = m(r, c);
  }
  return out;
}

Matrix row_softmax(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto in = m.row(r);
    if (in.empty()) continue;
    const double mx = *std::max_element(in.begin(), in.end());
    auto dst = out.row(r);
    double sum = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      dst[c] = std::exp(in[c] - mx);
      sum += dst[c];
    }
    for (double& v : dst) v /= sum;
  }
  return out;
}

Matrix hconcat(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("concat: row counts differ, " + a.shape() + " vs " + b.shape());
  }
  Matrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto dst = out.row(r);
    std::copy(a.row(r).begin(), a.row(r).end(), dst.begin());
    std::copy(b.row(r).begin(), b.row(r).end(), dst.begin() + static_cast<long>(a.cols()));
  }
  return out;
}

Matrix scaled(const Matrix& m, double factor) {
  std::vector<double> data(m.data().begin(), m.data().end());
  for (double& v : data) v *= factor;
  return Matrix(m.rows(), m.cols(), std::move(data));
}

Matrix added(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("add: " + a.shape() + " vs " + b.shape());
  }
  std::vector<double> data(a.data().begin(), a.data().end());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] += b.data()[i];
  return Matrix(a.rows(), a.cols(), std::move(data));
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("compare: " + a.shape() + " vs " + b.shape());
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  }
  return worst;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = std::vector<double>(m.data().begin(), m.data().end());
  return j;
}

Matrix matrix_from_json(const nlohmann::json& j, std::string_view what) {
  const std::string ctx(what);
  const std::size_t rows = detail::as_count(detail::require(j, "rows", ctx), ctx + ".rows");
  const std::size_t cols = detail::as_count(detail::require(j, "cols", ctx), ctx + ".cols");
  const auto& arr = detail::as_array(detail::require(j, "data", ctx), ctx + ".data");
  if (arr.size() != rows * cols) {
    throw ParseError(ctx + ": data has " + std::to_string(arr.size()) + " entries, expected " +
                     std::to_string(rows * cols));
  }
  std::vector<double> data;
  data.reserve(arr.size());
  for (const auto& v : arr) data.push_back(detail::as_number(v, ctx + ".data"));
  try {
    return Matrix(rows, cols, std::move(data));
  } catch (const ValidationError& e) {
    throw ParseError(ctx + ": " + e.what());
  }
}

Matrix load_matrix(const std::filesystem::path& path) {
  return matrix_from_json(read_json_file(path), path.string());
}

void save_matrix(const Matrix& m, const std::filesystem::path& path) {
  write_json_file(path, matrix_to_json(m));
}

}  // namespace layoutprior
