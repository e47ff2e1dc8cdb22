// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "layoutprior/conditioning.hpp"
#include "layoutprior/error.hpp"
#include "layoutprior/eval.hpp"
#include "layoutprior/file_io.hpp"
#include "layoutprior/ingest.hpp"
#include "layoutprior/prior.hpp"
#include "layoutprior/render.hpp"
#include "layoutprior/rescore.hpp"
#include "layoutprior/rng.hpp"
#include "layoutprior/synth.hpp"

namespace layoutprior::cli {

namespace {

// Empty path means standard output.
void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_text_file(path, content);
  }
}

std::string corpus_text(const Corpus& c) { return canonical_json(corpus_to_native_json(c)); }

AssociationPolicy association_from(const std::string& name, double mu, double sigma) {
  if (name == "gauss") return AssociationPolicy::gaussian(mu, sigma);
  if (name == "single") return AssociationPolicy::single();
  if (name == "equal") return AssociationPolicy::equal();
  throw ValidationError("unknown association policy '" + name + "'");
}

const std::vector<std::string> kAssocNames = {"gauss", "single", "equal"};

// ---------------------------------------------------------------- build-prior

struct BuildPriorArgs {
  std::string corpus;
  std::size_t bands = 10;
  std::optional<double> band_width;
  std::string out;
  std::string dot;
  double dot_threshold = 0.0;
  unsigned threads = 1;
  bool no_raw = false;
};

int build_prior_cmd(const BuildPriorArgs& a, std::ostream& out, std::ostream& err) {
  const Corpus corpus = load_native(a.corpus);
  BandConfig config = BandConfig::non_overlapping(a.bands == 0 ? 1 : a.bands);
  config.n_bands = a.bands;
  if (a.band_width) config.band_width_frac = *a.band_width;
  config.validate();

  unsigned threads = a.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : a.threads;
  const CoOccurrenceGraphSet graphs = build_prior(corpus, config, BuildOptions{true, threads});

  const BandSet bands = graphs.bands();
  err << "built " << graphs.n_graphs() << " graph(s) over " << corpus.layouts.size() << " layouts, "
      << graphs.vocabulary.size() << " classes\n";
  for (std::size_t j = 0; j < graphs.n_graphs(); ++j) {
    std::uint64_t pairs = 0;
    const CountMatrix& raw = (*graphs.raw_counts)[j];
    for (std::size_t m = 0; m < raw.size(); ++m) {
      for (std::size_t n = 0; n < raw.size(); ++n) {
        if (m != n) pairs += raw(m, n);
      }
    }
    char line[128];
    std::snprintf(line, sizeof line, "band %zu [%.3f, %.3f): %zu edges > %g, %llu off-diagonal counts\n", j,
                  bands.upper[j], bands.lower[j], edge_count(graphs.edges[j], a.dot_threshold),
                  a.dot_threshold, static_cast<unsigned long long>(pairs));
    err << line;
  }

  CoOccurrenceGraphSet saved = graphs;
  if (a.no_raw) saved.raw_counts.reset();
  emit(a.out, canonical_json(graphs_to_json(saved)), out);
  if (!a.dot.empty()) write_text_file(a.dot, graphs_to_dot(graphs, a.dot_threshold));
  return kOk;
}

// ---------------------------------------------------------------- condition

struct ConditionArgs {
  std::string proposals;
  std::string graphs;
  std::string nodes;
  std::string embed;
  std::string node_kind = "classifier";
  std::string assoc = "gauss";
  double mu = 0.0;
  double sigma = 0.3;
  std::string map = "soft";
  std::size_t d_prime = 512;
  bool concat = false;
  std::uint64_t seed = 0;
  std::string out;
};

int condition_cmd(const ConditionArgs& a, std::ostream& out, std::ostream& err) {
  const ProposalBatch batch = load_proposals(a.proposals);
  const CoOccurrenceGraphSet graphs = load_graphs(a.graphs);
  if (batch.logits.cols() != graphs.vocabulary.size()) {
    throw ShapeError("condition: logits have " + std::to_string(batch.logits.cols()) +
                     " classes, graphs have " + std::to_string(graphs.vocabulary.size()));
  }

  ConditioningConfig config;
  config.association = association_from(a.assoc, a.mu, a.sigma);
  config.association.validate();
  config.mapping = a.map == "hard" ? MappingPolicy::Hard : MappingPolicy::Soft;
  config.d_prime = a.d_prime;

  NodeFeatures nodes;
  if (a.node_kind == "proposal") {
    if (!batch.features) throw ValidationError("condition: --node-kind proposal needs proposal features");
    nodes = proposal_node_features(*batch.features, soft_mapping(batch.logits, config.mapping));
  } else {
    if (a.nodes.empty()) throw ValidationError("condition: --nodes is required for classifier node features");
    nodes = classifier_node_features(load_matrix(a.nodes));
  }

  Matrix embed;
  if (a.embed.empty()) {
    Rng rng(a.seed);
    embed = random_matrix(nodes.matrix.cols(), config.d_prime, rng);
    err << "embed: random " << embed.shape() << " from seed " << a.seed << "\n";
  } else {
    embed = load_matrix(a.embed);
  }

  const Matrix result = condition_proposals(batch, graphs, nodes, embed, config, a.concat);
  err << "conditioned " << batch.size() << " proposals with " << to_string(config.association.kind) << "/"
      << to_string(config.mapping) << " over " << graphs.n_graphs() << " graphs -> " << result.shape() << "\n";
  emit(a.out, canonical_json(matrix_to_json(result)), out);
  return kOk;
}

// ---------------------------------------------------------------- rescore

struct RescoreArgs {
  std::string detections;
  std::string graphs;
  double lambda = 0.5;
  std::string assoc = "gauss";
  double mu = 0.0;
  double sigma = 0.3;
  double epsilon = 1e-6;
  std::string logits;
  std::string out;
  std::string out_logits;
};

int rescore_cmd(const RescoreArgs& a, std::ostream& out, std::ostream& err) {
  RescoreConfig config;
  config.lambda = a.lambda;
  config.association = association_from(a.assoc, a.mu, a.sigma);
  config.epsilon = a.epsilon;
  config.validate();

  const Corpus dets = load_native(a.detections);
  const CoOccurrenceGraphSet graphs = load_graphs(a.graphs);
  std::optional<LogitsSidecar> sidecar;
  if (!a.logits.empty()) sidecar = load_sidecar(a.logits);

  const RescoredCorpus result = rescore_corpus(dets, graphs, config, sidecar ? &*sidecar : nullptr);
  std::size_t relabeled = 0;
  for (std::size_t l = 0; l < dets.layouts.size(); ++l) {
    for (std::size_t i = 0; i < dets.layouts[l].components.size(); ++i) {
      relabeled += dets.layouts[l].components[i].class_id != result.corpus.layouts[l].components[i].class_id;
    }
  }
  err << "rescored " << dets.component_count() << " detections in " << dets.layouts.size()
      << " layouts (lambda " << a.lambda << "), " << relabeled << " relabeled\n";
  emit(a.out, corpus_text(result.corpus), out);
  if (!a.out_logits.empty()) save_sidecar(result.logits, a.out_logits);
  return kOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string detections;
  std::string ground_truth;
  std::string format = "table";
  bool per_class = false;
  std::string out;
};

int eval_cmd(const EvalArgs& a, std::ostream& out, std::ostream&) {
  const Corpus dets = load_native(a.detections);
  const Corpus gts = load_native(a.ground_truth);
  const EvalReport report = evaluate(dets, gts);
  if (a.format == "json") {
    emit(a.out, canonical_json(report_to_json(report)), out);
  } else {
    emit(a.out, format_report_table(report, std::filesystem::path(a.detections).filename().string(), a.per_class),
         out);
  }
  return kOk;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string spec;
  std::string preset;
  std::size_t n = 1000;
  std::optional<std::uint64_t> seed;
  std::optional<double> noise;
  std::string out_clean;
  std::string out_noisy;
  std::string out_detections;
  std::string out_spec;
};

int synth_cmd(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  GeneratorSpec spec = [&] {
    if (!a.spec.empty() && !a.preset.empty()) throw ValidationError("synth: give a spec file or --preset, not both");
    if (!a.spec.empty()) return load_generator_spec(a.spec);
    if (a.preset == "two-band") return two_band_reference_spec();
    throw ValidationError("synth: a spec file or --preset two-band is required");
  }();
  if (a.seed) spec.seed = *a.seed;
  if (a.noise) spec.noise = *a.noise;
  spec.validate();

  const GeneratedCorpora corpora = generate(spec, a.n);
  err << "generated " << a.n << " layouts (" << corpora.clean.component_count() << " components, seed "
      << spec.seed << ", noise " << spec.noise << ")\n";
  const bool any = !a.out_clean.empty() || !a.out_noisy.empty() || !a.out_detections.empty();
  if (!a.out_clean.empty() || !any) emit(a.out_clean, corpus_text(corpora.clean), out);
  if (!a.out_noisy.empty()) write_text_file(a.out_noisy, corpus_text(corpora.noisy));
  if (!a.out_detections.empty()) {
    write_text_file(a.out_detections, corpus_text(as_detections(corpora.noisy, spec.noise)));
  }
  if (!a.out_spec.empty()) save_generator_spec(spec, a.out_spec);
  return kOk;
}

// ---------------------------------------------------------------- render

struct RenderArgs {
  std::string corpus;
  std::string layout_id;
  std::string out;
};

int render_cmd(const RenderArgs& a, std::ostream& out, std::ostream&) {
  const Corpus corpus = load_native(a.corpus);
  const LayoutDocument* layout = corpus.find(a.layout_id);
  if (!layout) throw ValidationError("render: no layout with id '" + a.layout_id + "' in " + a.corpus);
  emit(a.out, render_svg(*layout, corpus.vocabulary), out);
  return kOk;
}

// ---------------------------------------------------------------- split / import

struct SplitArgs {
  std::string corpus;
  std::string ids;
  std::optional<double> fraction;
  std::uint64_t seed = 0;
  std::string out_first;
  std::string out_second;
};

int split_cmd(const SplitArgs& a, std::ostream&, std::ostream& err) {
  const Corpus corpus = load_native(a.corpus);
  if (a.ids.empty() == !a.fraction) throw ValidationError("split: give exactly one of --ids or --fraction");
  std::pair<Corpus, Corpus> parts = [&] {
    if (a.fraction) return random_split(corpus, *a.fraction, a.seed);
    std::vector<std::string> ids;
    std::istringstream lines(read_text_file(a.ids));
    for (std::string line; std::getline(lines, line);) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (!line.empty()) ids.push_back(line);
    }
    return split_by_ids(corpus, ids);
  }();
  err << "split " << corpus.layouts.size() << " layouts into " << parts.first.layouts.size() << " + "
      << parts.second.layouts.size() << "\n";
  write_text_file(a.out_first, corpus_text(parts.first));
  write_text_file(a.out_second, corpus_text(parts.second));
  return kOk;
}

struct ImportArgs {
  std::string images;
  std::string annotations;
  std::string out;
};

int import_cmd(const ImportArgs& a, std::ostream& out, std::ostream& err) {
  const Corpus corpus = load_coco(a.images, a.annotations);
  err << "imported " << corpus.layouts.size() << " layouts, " << corpus.component_count() << " components, "
      << corpus.vocabulary.size() << " classes\n";
  emit(a.out, corpus_text(corpus), out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Band-partitioned co-occurrence priors for UI layout detection", "layoutprior"};
  app.set_version_flag("--version", std::string("layoutprior ") + kVersion + " (graph schema " +
                                        std::to_string(kGraphSchemaVersion) + ")");
  app.require_subcommand(1);

  BuildPriorArgs bp;
  auto* build = app.add_subcommand("build-prior", "Compute per-band co-occurrence graphs from a corpus");
  build->add_option("corpus", bp.corpus, "Native corpus (.json or .json.gz)")->required();
  build->add_option("--bands", bp.bands, "Number of bands N_b")->capture_default_str();
  build->add_option("--band-width", bp.band_width, "Band width as a fraction of layout height (default 1/N_b)");
  build->add_option("--out", bp.out, "Graph file (default: standard output)");
  build->add_option("--dot", bp.dot, "Also write a Graphviz DOT rendering");
  build->add_option("--dot-threshold", bp.dot_threshold, "Edges above this weight are drawn and counted")
      ->capture_default_str();
  build->add_option("--threads", bp.threads, "Accumulation threads (0 = all cores)")->capture_default_str();
  build->add_flag("--no-raw", bp.no_raw, "Omit raw integer counts from the graph file");

  ConditionArgs ca;
  auto* cond = app.add_subcommand("condition", "Condition proposal features on the graphs");
  cond->add_option("proposals", ca.proposals, "Proposal batch JSON")->required();
  cond->add_option("graphs", ca.graphs, "Graph file")->required();
  cond->add_option("--nodes", ca.nodes, "Node features W (C x K, MTX-JSON)");
  cond->add_option("--node-kind", ca.node_kind, "classifier: W from --nodes; proposal: class-averaged features")
      ->check(CLI::IsMember({"classifier", "proposal"}))
      ->capture_default_str();
  cond->add_option("--embed", ca.embed, "Embedding Z_e (K x D', MTX-JSON); random from --seed if omitted");
  cond->add_option("--assoc", ca.assoc, "Proposal-to-band association")
      ->check(CLI::IsMember(kAssocNames))
      ->capture_default_str();
  cond->add_option("--mu", ca.mu, "Gaussian mean")->capture_default_str();
  cond->add_option("--sigma", ca.sigma, "Gaussian standard deviation")->capture_default_str();
  cond->add_option("--map", ca.map, "Category-to-region mapping")
      ->check(CLI::IsMember({"soft", "hard"}))
      ->capture_default_str();
  cond->add_option("--d-prime", ca.d_prime, "Conditioned feature dimension D'")->capture_default_str();
  cond->add_flag("--concat", ca.concat, "Output [f, f'] instead of f'");
  cond->add_option("--seed", ca.seed, "Seed for the random embedding")->capture_default_str();
  cond->add_option("--out", ca.out, "Output matrix (default: standard output)");

  RescoreArgs ra;
  auto* resc = app.add_subcommand("rescore", "Re-score detections with band-local context");
  resc->add_option("detections", ra.detections, "Native corpus of detections")->required();
  resc->add_option("graphs", ra.graphs, "Graph file")->required();
  resc->add_option("--lambda", ra.lambda, "Blend strength in [0,1]; 0 leaves detections unchanged")
      ->capture_default_str();
  resc->add_option("--assoc", ra.assoc, "Detection-to-band association")
      ->check(CLI::IsMember(kAssocNames))
      ->capture_default_str();
  resc->add_option("--mu", ra.mu, "Gaussian mean")->capture_default_str();
  resc->add_option("--sigma", ra.sigma, "Gaussian standard deviation")->capture_default_str();
  resc->add_option("--epsilon", ra.epsilon, "Context floor")->capture_default_str();
  resc->add_option("--logits", ra.logits, "Per-layout logits sidecar (default: derived from label and score)");
  resc->add_option("--out", ra.out, "Re-scored corpus (default: standard output)");
  resc->add_option("--out-logits", ra.out_logits, "Also write the re-scored logits sidecar");

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "COCO-style AP/AR of detections against ground truth");
  ev->add_option("detections", ea.detections, "Native corpus of detections")->required();
  ev->add_option("ground-truth", ea.ground_truth, "Native ground-truth corpus")->required();
  ev->add_option("--format", ea.format, "Report format")
      ->check(CLI::IsMember({"table", "json"}))
      ->capture_default_str();
  ev->add_flag("--per-class", ea.per_class, "Add one table row per class");
  ev->add_option("--out", ea.out, "Report file (default: standard output)");

  SynthArgs sa;
  auto* syn = app.add_subcommand("synth", "Generate corpora from planted co-occurrence graphs");
  syn->add_option("spec", sa.spec, "Generator spec JSON");
  syn->add_option("--preset", sa.preset, "Built-in spec instead of a file")->check(CLI::IsMember({"two-band"}));
  syn->add_option("--n", sa.n, "Number of layouts")->capture_default_str();
  syn->add_option("--seed", sa.seed, "Override the spec seed");
  syn->add_option("--noise", sa.noise, "Override the spec label noise");
  syn->add_option("--out-clean", sa.out_clean, "Clean corpus (default: standard output)");
  syn->add_option("--out-noisy", sa.out_noisy, "Corpus with noisy labels");
  syn->add_option("--out-detections", sa.out_detections, "Noisy corpus with posterior scores, for rescore");
  syn->add_option("--out-spec", sa.out_spec, "Write the effective spec");

  RenderArgs rna;
  auto* ren = app.add_subcommand("render", "Draw one layout as SVG");
  ren->add_option("corpus", rna.corpus, "Native corpus")->required();
  ren->add_option("layout-id", rna.layout_id, "Layout id")->required();
  ren->add_option("--out", rna.out, "SVG file (default: standard output)");

  SplitArgs spa;
  auto* spl = app.add_subcommand("split", "Partition a corpus by an id list or a seeded random fraction");
  spl->add_option("corpus", spa.corpus, "Native corpus")->required();
  spl->add_option("--ids", spa.ids, "File with one layout id per line; listed layouts go first");
  spl->add_option("--fraction", spa.fraction, "Fraction of layouts in the first part");
  spl->add_option("--seed", spa.seed, "Seed for --fraction")->capture_default_str();
  spl->add_option("--out-first", spa.out_first, "First part")->required();
  spl->add_option("--out-second", spa.out_second, "Second part")->required();

  ImportArgs ia;
  auto* imp = app.add_subcommand("import-coco", "Convert COCO-style annotations to the native format");
  imp->add_option("images", ia.images, "JSON with `images` (and usually `categories`)")->required();
  imp->add_option("annotations", ia.annotations, "JSON with `annotations` and `categories`")->required();
  imp->add_option("--out", ia.out, "Native corpus (default: standard output)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kOk;
    }
    err << "error: usage: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (build->parsed()) return build_prior_cmd(bp, out, err);
    if (cond->parsed()) return condition_cmd(ca, out, err);
    if (resc->parsed()) return rescore_cmd(ra, out, err);
    if (ev->parsed()) return eval_cmd(ea, out, err);
    if (syn->parsed()) return synth_cmd(sa, out, err);
    if (ren->parsed()) return render_cmd(rna, out, err);
    if (spl->parsed()) return split_cmd(spa, out, err);
    if (imp->parsed()) return import_cmd(ia, out, err);
  } catch (const ShapeError& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return kShapeError;
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: parse: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace layoutprior::cli
