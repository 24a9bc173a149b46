// Command-line front end: document ingestion, the detect/order/construct
// stages (separately or as one pipeline), metric evaluation, and synthetic
// corpus generation. Stages communicate through JSON files so any stage can
// be replaced by an external implementation.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "docstruct/eval.hpp"
#include "docstruct/json_io.hpp"
#include "docstruct/pipeline.hpp"
#include "docstruct/synth.hpp"

namespace fs = std::filesystem;
using namespace docstruct;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct ScorerOptions {
  std::string spec = "heuristic";
  double column_overlap = 0.5;
  double iou_threshold = 0.5;

  PipelineConfig config() const {
    PipelineConfig cfg;
    if (spec == "heuristic") {
      cfg.source = ScorerSource::Heuristic;
    } else if (spec == "oracle") {
      cfg.source = ScorerSource::Oracle;
    } else if (spec.rfind("files:", 0) == 0) {
      cfg.source = ScorerSource::Files;
      cfg.score_dir = spec.substr(6);
      if (cfg.score_dir.empty()) throw validation_error("--scorer files: requires a directory");
    } else {
      throw validation_error("unknown scorer source '" + spec +
                             "' (expected heuristic, oracle, or files:<dir>)");
    }
    cfg.params.column_overlap_ratio = column_overlap;
    cfg.iou_threshold = iou_threshold;
    return cfg;
  }
};

void add_scorer_options(CLI::App* cmd, ScorerOptions& opts) {
  cmd->add_option("--scorer", opts.spec, "Score source: heuristic | oracle | files:<dir>")
      ->capture_default_str();
  cmd->add_option("--column-overlap", opts.column_overlap,
                  "Horizontal overlap ratio that merges elements into one column")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--iou-threshold", opts.iou_threshold,
                  "IoU threshold for matching graphical objects during evaluation")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
}

Document load_validated_document(const std::string& path) {
  Document doc = read_document(path);
  const auto violations = validate_document(doc);
  if (!violations.empty()) {
    for (const auto& v : violations) {
      std::cerr << path << ": element " << v.id << ": " << v.rule << "\n";
    }
    throw validation_error("document '" + path + "' failed validation");
  }
  return doc;
}

std::vector<Region> load_regions(const std::string& path) {
  const ojson j = read_json(path);
  const ojson& block = j.contains("regions") ? j.at("regions")
                       : j.contains("ground_truth") ? j.at("ground_truth").at("regions")
                                                    : j;
  std::vector<Region> regions;
  try {
    for (const auto& r : block) regions.push_back(region_from_json(r));
  } catch (const nlohmann::json::exception& e) {
    throw io_error("'" + path + "': " + e.what());
  }
  return regions;
}

std::vector<ReadingOrderGroup> load_groups(const std::string& path) {
  const ojson j = read_json(path);
  const ojson& block = j.contains("groups") ? j.at("groups")
                       : j.contains("ground_truth") ? j.at("ground_truth").at("groups")
                                                    : j;
  std::vector<ReadingOrderGroup> groups;
  try {
    for (const auto& g : block) groups.push_back(group_from_json(g));
  } catch (const nlohmann::json::exception& e) {
    throw io_error("'" + path + "': " + e.what());
  }
  return groups;
}

ojson regions_json(const std::vector<Region>& regions) {
  ojson arr = ojson::array();
  for (const auto& r : regions) arr.push_back(to_json(r));
  return arr;
}

ojson order_json(const std::vector<Region>& regions, const OrderResult& order) {
  ojson out;
  out["regions"] = regions_json(regions);
  ojson groups = ojson::array();
  for (const auto& g : order.groups) groups.push_back(to_json(g));
  out["groups"] = std::move(groups);
  ojson links = ojson::array();
  for (const auto& e : order.links) {
    ojson link;
    link["from"] = e.from;
    link["to"] = e.to;
    link["label"] = e.label ? *e.label : "";
    link["score"] = e.score;
    links.push_back(std::move(link));
  }
  out["links"] = std::move(links);
  return out;
}

ojson construct_json(const ConstructResult& result) {
  ojson out;
  out["toc"] = to_json(result.toc);
  out["hierarchy"] = to_json(result.hierarchy);
  return out;
}

// ---------------------------------------------------------------------------
// Stage commands
// ---------------------------------------------------------------------------

struct StageArgs {
  std::vector<std::string> inputs;
  std::string output;
  std::string regions_path;
  std::string groups_path;
  ScorerOptions scorer;
  int jobs = 1;
};

/// Runs `work` over the inputs with a small worker pool. Results are
/// written after all workers finish, in input order.
int run_per_document(const StageArgs& args,
                     const std::function<ojson(const std::string&)>& work) {
  const std::size_t n = args.inputs.size();
  const bool multi = n > 1;
  if (multi) {
    fs::create_directories(args.output);
  } else if (const fs::path parent = fs::path(args.output).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }

  std::vector<ojson> results(n);
  std::vector<std::string> errors(n);
  std::vector<int> codes(n, kExitOk);
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= n) break;
      try {
        results[i] = work(args.inputs[i]);
      } catch (const io_error& e) {
        errors[i] = e.what();
        codes[i] = kExitIo;
      } catch (const validation_error& e) {
        errors[i] = e.what();
        codes[i] = kExitValidation;
      } catch (const std::exception& e) {
        errors[i] = e.what();
        codes[i] = kExitValidation;
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(args.jobs, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int exit_code = kExitOk;
  for (std::size_t i = 0; i < n; ++i) {
    if (codes[i] != kExitOk) {
      std::cerr << args.inputs[i] << ": " << errors[i] << "\n";
      exit_code = std::max(exit_code, codes[i]);
      continue;
    }
    const std::string path =
        multi ? (fs::path(args.output) / (fs::path(args.inputs[i]).stem().string() + ".out.json"))
                    .string()
              : args.output;
    write_json(results[i], path);
  }
  return exit_code;
}

int cmd_detect(const StageArgs& args) {
  const PipelineConfig cfg = args.scorer.config();
  return run_per_document(args, [&](const std::string& input) {
    const Document doc = load_validated_document(input);
    const auto scorer = make_scorer(cfg, doc);
    ojson out;
    out["regions"] = regions_json(run_detect(doc, *scorer));
    return out;
  });
}

int cmd_order(const StageArgs& args) {
  const PipelineConfig cfg = args.scorer.config();
  return run_per_document(args, [&](const std::string& input) {
    const Document doc = load_validated_document(input);
    const auto scorer = make_scorer(cfg, doc);
    const std::vector<Region> regions = load_regions(args.regions_path);
    return order_json(regions, run_order(doc, regions, *scorer));
  });
}

int cmd_construct(const StageArgs& args) {
  const PipelineConfig cfg = args.scorer.config();
  return run_per_document(args, [&](const std::string& input) {
    const Document doc = load_validated_document(input);
    const auto scorer = make_scorer(cfg, doc);
    const std::vector<Region> regions = load_regions(args.regions_path);
    OrderResult order;
    order.groups = load_groups(args.groups_path);
    return construct_json(run_construct(doc, regions, order, *scorer));
  });
}

int cmd_pipeline(const StageArgs& args) {
  const PipelineConfig cfg = args.scorer.config();
  return run_per_document(args, [&](const std::string& input) {
    const Document doc = load_validated_document(input);
    const auto scorer = make_scorer(cfg, doc);
    const PipelineResult result = run_pipeline(doc, *scorer);
    return construct_json({result.toc, result.hierarchy});
  });
}

// ---------------------------------------------------------------------------
// Evaluation commands
// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::string output;
  double iou_threshold = 0.5;
};

struct EvalPair {
  std::string name;
  ojson pred;
  ojson gt;
};

std::vector<EvalPair> collect_pairs(const EvalArgs& args) {
  std::vector<EvalPair> pairs;
  if (fs::is_directory(args.pred) && fs::is_directory(args.gt)) {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(args.pred)) {
      if (entry.path().extension() == ".json") names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    for (const auto& name : names) {
      const fs::path gt_path = fs::path(args.gt) / name;
      if (!fs::exists(gt_path)) {
        throw io_error("no ground-truth file matching '" + name + "'");
      }
      pairs.push_back({name, read_json((fs::path(args.pred) / name).string()),
                       read_json(gt_path.string())});
    }
    if (pairs.empty()) throw io_error("no .json files under '" + args.pred + "'");
  } else {
    pairs.push_back({fs::path(args.pred).filename().string(), read_json(args.pred),
                     read_json(args.gt)});
  }
  return pairs;
}

const ojson& section(const ojson& j, const char* key, const std::string& which) {
  if (j.contains(key)) return j.at(key);
  if (j.contains("ground_truth") && j.at("ground_truth").contains(key)) {
    return j.at("ground_truth").at(key);
  }
  throw io_error(which + ": missing '" + std::string(key) + "' block");
}

ojson reds_report_json(const RedsReport& r) {
  ojson j;
  j["D"] = r.D;
  j["N"] = r.N;
  j["score"] = r.score;
  ojson matches = ojson::array();
  for (const auto& m : r.matches) {
    ojson e;
    e["pred"] = m.pred_index;
    e["gt"] = m.gt_index;
    e["distance"] = m.distance;
    matches.push_back(std::move(e));
  }
  j["matches"] = std::move(matches);
  return j;
}

void emit_report(const ojson& report, const std::string& output) {
  if (output.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    write_json(report, output);
  }
}

int cmd_eval_reds(const EvalArgs& args) {
  const auto pairs = collect_pairs(args);
  ojson documents = ojson::array();
  std::int64_t total_d_text = 0, total_n_text = 0, total_d_graph = 0, total_n_graph = 0;
  double macro_text = 0.0, macro_graph = 0.0;
  for (const auto& pair : pairs) {
    std::vector<Region> pred_regions, gt_regions;
    std::vector<ReadingOrderGroup> pred_groups, gt_groups;
    for (const auto& r : section(pair.pred, "regions", pair.name)) {
      pred_regions.push_back(region_from_json(r));
    }
    for (const auto& g : section(pair.pred, "groups", pair.name)) {
      pred_groups.push_back(group_from_json(g));
    }
    for (const auto& r : section(pair.gt, "regions", pair.name)) {
      gt_regions.push_back(region_from_json(r));
    }
    for (const auto& g : section(pair.gt, "groups", pair.name)) {
      gt_groups.push_back(group_from_json(g));
    }
    const RedsResult result =
        reds(pred_regions, pred_groups, gt_regions, gt_groups, args.iou_threshold);
    ojson doc;
    doc["document"] = pair.name;
    doc["text-region"] = reds_report_json(result.text);
    doc["graphical-region"] = reds_report_json(result.graphical);
    documents.push_back(std::move(doc));
    total_d_text += result.text.D;
    total_n_text += result.text.N;
    total_d_graph += result.graphical.D;
    total_n_graph += result.graphical.N;
    macro_text += result.text.score;
    macro_graph += result.graphical.score;
  }
  auto aggregate = [&](std::int64_t d, std::int64_t n, double macro_sum) {
    ojson a;
    a["micro"] = n > 0 ? std::max(0.0, 1.0 - static_cast<double>(d) / static_cast<double>(n))
                       : (d == 0 ? 1.0 : 0.0);
    a["macro"] = macro_sum / static_cast<double>(pairs.size());
    return a;
  };
  ojson report;
  report["metric"] = "reds";
  report["documents"] = std::move(documents);
  report["aggregate"]["text-region"] = aggregate(total_d_text, total_n_text, macro_text);
  report["aggregate"]["graphical-region"] = aggregate(total_d_graph, total_n_graph, macro_graph);
  emit_report(report, args.output);
  return kExitOk;
}

int cmd_eval_steds(const EvalArgs& args, bool toc_mode) {
  const auto pairs = collect_pairs(args);
  StedsReport aggregate;
  ojson documents = ojson::array();
  for (const auto& pair : pairs) {
    HierarchyNode pred_tree, gt_tree;
    if (toc_mode) {
      pred_tree = toc_with_payloads(toc_from_json(section(pair.pred, "toc", pair.name)),
                                    hierarchy_from_json(section(pair.pred, "hierarchy", pair.name)));
      gt_tree = toc_with_payloads(toc_from_json(section(pair.gt, "toc", pair.name)),
                                  hierarchy_from_json(section(pair.gt, "hierarchy", pair.name)));
    } else {
      pred_tree = hierarchy_from_json(section(pair.pred, "hierarchy", pair.name));
      gt_tree = hierarchy_from_json(section(pair.gt, "hierarchy", pair.name));
    }
    const double score = steds(pred_tree, gt_tree);
    const std::size_t weight = std::max(tree_size(pred_tree), tree_size(gt_tree));
    aggregate.add(score, weight);
    ojson doc;
    doc["document"] = pair.name;
    doc["score"] = score;
    doc["nodes"] = weight;
    documents.push_back(std::move(doc));
  }
  aggregate.finalize();
  ojson report;
  report["metric"] = toc_mode ? "steds-toc" : "steds-hierarchy";
  report["documents"] = std::move(documents);
  report["micro"] = aggregate.micro;
  report["macro"] = aggregate.macro;
  report["note"] = "node substitution cost is this implementation's reconstruction: "
                   "1 - normalized text similarity when roles match, else 1";
  emit_report(report, args.output);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Synthesis command
// ---------------------------------------------------------------------------

struct SynthArgs {
  std::uint64_t seed = 1;
  int docs = 1;
  int pages = 2;
  int columns = 2;
  int depth = 2;
  int paragraphs = 2;
  double figure_prob = 0.25;
  bool oracle_scores = true;
  std::string output;
};

int cmd_synth(const SynthArgs& args) {
  const bool single_file = args.docs == 1 && fs::path(args.output).extension() == ".json";
  if (!single_file) fs::create_directories(args.output);

  for (int d = 0; d < args.docs; ++d) {
    SynthConfig cfg;
    cfg.seed = args.seed + static_cast<std::uint64_t>(d) * 0x9e37ull;
    cfg.pages = args.pages;
    cfg.columns = args.columns;
    cfg.toc_depth = args.depth;
    cfg.paragraphs_per_section = args.paragraphs;
    cfg.figure_probability = args.figure_prob;
    const Document doc = generate(cfg);

    if (single_file) {
      write_document(doc, args.output);
    } else {
      char name[32];
      std::snprintf(name, sizeof(name), "doc_%04d", d);
      const fs::path base = fs::path(args.output) / name;
      write_document(doc, base.string() + ".json");
      if (args.oracle_scores) {
        fs::create_directories(base.string() + ".scores");
        write_oracle_scores(doc, base.string() + ".scores");
      }
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Document structure parser: detect regions, order them, build the structure tree"};
  app.require_subcommand(1);

  StageArgs detect_args, order_args, construct_args, pipeline_args;
  EvalArgs reds_args, steds_args, hierarchy_args;
  SynthArgs synth_args;

  auto* detect = app.add_subcommand("detect", "Group text-lines into labeled regions");
  detect->add_option("input", detect_args.inputs, "Document JSON file(s)")->required();
  detect->add_option("-o,--output", detect_args.output, "Output file (or directory)")->required();
  detect->add_option("--jobs", detect_args.jobs, "Worker threads for multi-document inputs");
  add_scorer_options(detect, detect_args.scorer);

  auto* order = app.add_subcommand("order", "Sequence regions into reading-order groups");
  order->add_option("input", order_args.inputs, "Document JSON file(s)")->required();
  order->add_option("--regions", order_args.regions_path, "Regions JSON from the detect stage")
      ->required();
  order->add_option("-o,--output", order_args.output, "Output file (or directory)")->required();
  order->add_option("--jobs", order_args.jobs, "Worker threads");
  add_scorer_options(order, order_args.scorer);

  auto* construct = app.add_subcommand("construct", "Build the heading and structure trees");
  construct->add_option("input", construct_args.inputs, "Document JSON file(s)")->required();
  construct->add_option("--regions", construct_args.regions_path, "Regions JSON")->required();
  construct->add_option("--groups", construct_args.groups_path, "Groups JSON from the order stage")
      ->required();
  construct->add_option("-o,--output", construct_args.output, "Output file (or directory)")
      ->required();
  construct->add_option("--jobs", construct_args.jobs, "Worker threads");
  add_scorer_options(construct, construct_args.scorer);

  auto* pipeline = app.add_subcommand("pipeline", "Run detect, order, and construct in one go");
  pipeline->add_option("input", pipeline_args.inputs, "Document JSON file(s)")->required();
  pipeline->add_option("-o,--output", pipeline_args.output, "Output file (or directory)")
      ->required();
  pipeline->add_option("--jobs", pipeline_args.jobs, "Worker threads");
  add_scorer_options(pipeline, pipeline_args.scorer);

  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->require_subcommand(1);
  auto add_eval = [&](const char* name, const char* help, EvalArgs& args) {
    auto* cmd = eval->add_subcommand(name, help);
    cmd->add_option("pred", args.pred, "Prediction JSON file or directory")->required();
    cmd->add_option("gt", args.gt, "Ground-truth JSON file or directory")->required();
    cmd->add_option("-o,--output", args.output, "Report file (stdout when omitted)");
    cmd->add_option("--iou-threshold", args.iou_threshold,
                    "IoU threshold for matching graphical objects")
        ->check(CLI::Range(0.0, 1.0));
    return cmd;
  };
  auto* eval_reds = add_eval("reds", "Reading-order edit distance score", reds_args);
  auto* eval_steds = add_eval("steds", "Heading-tree similarity", steds_args);
  auto* eval_hierarchy = add_eval("hierarchy", "Structure-tree similarity", hierarchy_args);

  auto* synth = app.add_subcommand("synth", "Generate synthetic documents with ground truth");
  synth->add_option("--seed", synth_args.seed, "Base seed")->capture_default_str();
  synth->add_option("--docs", synth_args.docs, "Number of documents")->capture_default_str();
  synth->add_option("--pages", synth_args.pages, "Page budget per document")
      ->check(CLI::Range(1, 8))
      ->capture_default_str();
  synth->add_option("--columns", synth_args.columns, "Columns per page")
      ->check(CLI::Range(1, 3))
      ->capture_default_str();
  synth->add_option("--depth", synth_args.depth, "Maximum heading depth")
      ->check(CLI::Range(1, 4))
      ->capture_default_str();
  synth->add_option("--paragraphs", synth_args.paragraphs, "Paragraphs per section (upper bound)")
      ->capture_default_str();
  synth->add_option("--figure-prob", synth_args.figure_prob, "Per-section figure probability")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  synth->add_flag("!--no-scores", synth_args.oracle_scores,
                  "Skip writing oracle score files (directory mode)");
  synth->add_option("-o,--output", synth_args.output, "Output .json file or directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitIo;
  }

  try {
    if (detect->parsed()) return cmd_detect(detect_args);
    if (order->parsed()) return cmd_order(order_args);
    if (construct->parsed()) return cmd_construct(construct_args);
    if (pipeline->parsed()) return cmd_pipeline(pipeline_args);
    if (eval_reds->parsed()) return cmd_eval_reds(reds_args);
    if (eval_steds->parsed()) return cmd_eval_steds(steds_args, true);
    if (eval_hierarchy->parsed()) return cmd_eval_steds(hierarchy_args, false);
    if (synth->parsed()) return cmd_synth(synth_args);
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
