#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "storegrid/storegrid.hpp"

namespace fs = std::filesystem;
using namespace storegrid;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

void write_text(const fs::path& p, const std::string& s) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw RuntimeError("cannot write " + p.string());
  out << s;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_json(const fs::path& p, const ojson& j) { write_text(p, j.dump(2) + "\n"); }

ojson read_json(const fs::path& p) {
  try {
    return ojson::parse(read_text(p));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(p.string() + ": " + e.what());
  }
}

/// Flag paths are relative to the working directory; config paths are
/// relative to the config file. Rewrites a flag path into config terms.
std::string rebase(const std::string& flag_path, const fs::path& base_dir) {
  if (fs::path(flag_path).is_absolute()) return flag_path;
  return fs::absolute(flag_path).lexically_normal().lexically_relative(fs::absolute(base_dir).lexically_normal()).string();
}

ExperimentConfig base_config(const std::string& config_path) {
  if (config_path.empty()) {
    ExperimentConfig c;
    c.base_dir = ".";
    return c;
  }
  return load_config(config_path);
}

std::optional<double> parse_min_reward(const std::string& s) {
  if (s == "default") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("--min-reward must be a number or 'default', got '" + s + "'");
  }
}

ojson seeds_json(std::uint64_t seed) {
  ojson s;
  s["experiment"] = seed;
  s["conditions"] = derive_seed(seed, {stream::conditions});
  s["pnn"] = derive_seed(seed, {stream::pnn});
  s["human"] = derive_seed(seed, {stream::human});
  s["calibration"] = derive_seed(seed, {stream::calibration});
  s["maxent"] = derive_seed(seed, {stream::maxent});
  return s;
}

ojson manifest_head(const char* command, const ExperimentConfig& cfg, const Layout& layout) {
  ojson m;
  m["tool"] = "storegrid";
  m["version"] = kVersion;
  m["command"] = command;
  m["config"] = ojson::parse(cfg.to_json().dump());
  m["config_hash"] = hex64(cfg.hash());
  m["layout"] = {{"file", "layout.json"}, {"hash", hex64(layout_hash(layout))}};
  m["seeds"] = seeds_json(cfg.seed);
  return m;
}

/// Writes layout, one trajectory file per method, manifest and timings.
void write_generation(const fs::path& out, const Layout& layout, const GenerationResult& gen, ojson manifest,
                      ojson timings) {
  fs::create_directories(out);
  write_text(out / "layout.json", serialize_layout(layout));
  ojson methods = ojson::object();
  for (const auto& o : gen.outputs) {
    const std::string name(method_name(o.method));
    write_trajectories(out / (name + ".jsonl"), layout, o.trajectories);
    ojson info;
    info["file"] = name + ".jsonl";
    for (const auto& [k, v] : o.info.items()) info[k] = v;
    methods[name] = std::move(info);
    timings[name] = o.seconds;
  }
  manifest["methods"] = std::move(methods);
  write_json(out / "manifest.json", manifest);
  write_json(out / "timings.json", timings);
}

struct RunDir {
  fs::path dir;
  ojson manifest;
  Layout layout;
  std::vector<std::string> methods;

  std::vector<Trajectory> load(const std::string& method) const {
    if (!manifest["methods"].contains(method))
      throw ValidationError("run " + dir.string() + " has no trajectories for method '" + method + "'");
    return read_trajectories(dir / manifest["methods"][method]["file"].get<std::string>(), layout);
  }
};

/// Opens a run directory, listing every missing artifact by name.
RunDir open_run(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ValidationError("run directory " + dir.string() + " does not exist");
  std::vector<std::string> missing;
  if (!fs::exists(dir / "manifest.json")) missing.push_back("manifest.json");
  if (!fs::exists(dir / "layout.json")) missing.push_back("layout.json");
  if (!missing.empty()) {
    std::string msg = "missing artifacts in " + dir.string() + ":";
    for (const auto& m : missing) msg += " " + m;
    throw ValidationError(msg);
  }
  RunDir r{dir, read_json(dir / "manifest.json"), load_layout_file(dir / "layout.json"), {}};
  if (!r.manifest.contains("methods") || !r.manifest["methods"].is_object())
    throw ValidationError("manifest in " + dir.string() + " lists no methods");
  for (const auto& [name, info] : r.manifest["methods"].items()) {
    r.methods.push_back(name);
    const std::string file = info.value("file", name + ".jsonl");
    if (!fs::exists(dir / file)) missing.push_back(file);
  }
  if (!missing.empty()) {
    std::string msg = "missing artifacts in " + dir.string() + ":";
    for (const auto& m : missing) msg += " " + m;
    throw ValidationError(msg);
  }
  return r;
}

std::vector<std::string> methods_or_all(const std::vector<std::string>& chosen, const RunDir& run) {
  if (chosen.empty()) return run.methods;
  for (const auto& m : chosen) method_from_name(m);
  return chosen;
}

// ---------------------------------------------------------------------------
// Commands

struct GenerateArgs {
  std::string config, layout, mix, basket, out, min_reward, budget_mode;
  std::vector<std::string> methods;
  std::optional<int> checkout, budget;
  std::optional<std::size_t> count;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau, exponent, detour_target;
};

int cmd_generate(const GenerateArgs& a, int workers) {
  ExperimentConfig cfg = base_config(a.config);
  if (!a.layout.empty()) cfg.layout = rebase(a.layout, cfg.base_dir);
  if (!a.mix.empty()) cfg.basket_mix = rebase(a.mix, cfg.base_dir);
  if (!a.methods.empty()) {
    cfg.methods.clear();
    for (const auto& m : a.methods) cfg.methods.push_back(method_from_name(m));
  }
  if (a.count) cfg.count = *a.count;
  if (a.seed) cfg.seed = *a.seed;
  if (a.tau) cfg.tau = *a.tau;
  if (a.exponent) cfg.pnn_exponent = *a.exponent;
  if (a.detour_target) cfg.human.detour_target = *a.detour_target;
  if (!a.min_reward.empty()) cfg.min_reward = parse_min_reward(a.min_reward);
  if (!a.budget_mode.empty()) cfg.budget = budget_mode_from_name(a.budget_mode);
  if (a.budget) cfg.budget = BudgetMode::none;
  if (cfg.layout.empty()) throw ValidationError("no layout given (--layout or config)");
  cfg.validate();
  const fs::path out = a.out.empty() ? cfg.resolve(cfg.output) : fs::path(a.out);

  const Layout layout = load_layout_file(cfg.resolve(cfg.layout));
  std::vector<Basket> conditions;
  ojson source;
  if (!a.basket.empty()) {
    Basket b = make_basket(parse_items(layout, a.basket), a.checkout.value_or(0), a.budget);
    check_basket(layout, b);
    conditions.assign(cfg.count, b);
    source["source"] = "basket";
    source["basket"] = basket_to_json(layout, b);
  } else {
    if (a.checkout || a.budget) throw ValidationError("--checkout and --budget need --basket");
    conditions = experiment_conditions(layout, cfg, cfg.seed);
    source["source"] = "basket_mix";
  }

  const auto t0 = std::chrono::steady_clock::now();
  const GenerationResult gen = generate_methods(layout, conditions, cfg, cfg.seed, workers);
  ojson manifest = manifest_head("generate", cfg, layout);
  manifest["conditions"] = source;
  if (gen.calibration)
    manifest["human_calibration"] = {{"spread", gen.calibration->spread},
                                     {"achieved_ratio", gen.calibration->achieved_ratio},
                                     {"batch", gen.calibration->batch}};
  ojson timings;
  timings["total"] = detail::seconds_since(t0);
  write_generation(out, layout, gen, manifest, timings);
  for (const auto& o : gen.outputs)
    for (const auto& w : o.info.value("warnings", std::vector<std::string>{}))
      std::cerr << ojson{{"warning", w}, {"method", method_name(o.method)}}.dump() << "\n";
  std::cout << "generated " << cfg.count << " trajectories per method into " << out.string() << "\n";
  return 0;
}

int cmd_analyze(const std::string& dir, const std::string& reference, int workers) {
  const RunDir run = open_run(dir);
  method_from_name(reference);
  const auto ref = run.load(reference);
  std::vector<DivergenceRow> rows;
  ojson occupancy_totals = ojson::object();
  fs::create_directories(run.dir / "heatmaps");
  for (const auto& m : run.methods) {
    const auto trajs = m == reference ? ref : run.load(m);
    const GridDistribution occ = occupancy(trajs, run.layout);
    occupancy_totals[m] = occ.total();
    write_grid_csv(run.dir / "heatmaps" / (m + ".csv"), occ);
    write_pgm(run.dir / "heatmaps" / (m + ".pgm"), occ);
    if (m != reference) rows.push_back(divergence(run.layout, ref, trajs, m, workers));
  }
  if (rows.empty()) throw ValidationError("no method besides the reference '" + reference + "' to compare");
  write_text(run.dir / "divergence.csv", divergence_table_csv(rows));
  ojson j;
  j["reference"] = reference;
  j["occupancy_total"] = occupancy_totals;
  auto arr = ojson::array();
  for (const auto& r : rows)
    arr.push_back({{"method", r.method},
                   {"jsd_pooled", r.jsd_pooled},
                   {"wd_pooled", r.wd_pooled},
                   {"jsd_mean", r.jsd_mean},
                   {"wd_mean", r.wd_mean}});
  j["divergence"] = std::move(arr);
  write_json(run.dir / "analysis.json", j);
  std::cout << read_text(run.dir / "divergence.csv");
  return 0;
}

int cmd_traffic(const std::string& dir, const std::vector<std::string>& chosen) {
  const RunDir run = open_run(dir);
  for (const auto& m : methods_or_all(chosen, run)) {
    const ShelfTraffic st = shelf_traffic(run.load(m), run.layout);
    std::string csv = "col,row,category,visits,theta\n";
    char buf[64];
    for (std::size_t i = 0; i < st.shelves.size(); ++i) {
      const Cell c = st.shelves[i];
      const int cat = run.layout.category_at(c);
      std::snprintf(buf, sizeof buf, ",%zu,%.9g\n", st.visits[i], st.theta[i]);
      csv += std::to_string(c.col) + "," + std::to_string(c.row) + "," + (cat >= 0 ? run.layout.category(cat).id : "") +
             buf;
    }
    write_text(run.dir / "traffic" / (m + ".csv"), csv);
    bool any = false;
    for (double t : st.theta) any = any || t > 0;
    if (any) write_pgm(run.dir / "traffic" / (m + ".pgm"), st.as_distribution());
  }
  std::cout << "shelf traffic written to " << (run.dir / "traffic").string() << "\n";
  return 0;
}

int cmd_cluster(const std::string& layout_path, const std::string& baskets_path, int k_max, std::uint64_t seed,
                double threshold, const std::string& out) {
  const Layout layout = load_layout_file(layout_path);
  const BasketMix mix = load_basket_mix(layout, baskets_path);
  if (k_max < 1) throw ValidationError("--k-max must be at least 1");
  const Clustering cl = cluster_baskets(mix.baskets, layout.category_count(), k_max, seed, 16, threshold);
  ojson j;
  j["k"] = cl.k;
  j["wcss"] = cl.wcss;
  j["threshold"] = threshold;
  auto arr = ojson::array();
  for (const auto& c : cl.clusters) arr.push_back(profile_to_json(layout, c));
  j["clusters"] = std::move(arr);
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(out, j);
    std::cout << "k = " << cl.k << ", clusters written to " << out << "\n";
  }
  return 0;
}

ClusterProfile read_profile(const Layout& layout, const std::string& path, std::optional<int> index) {
  const auto j = read_json(path);
  if (j.contains("clusters")) {
    if (!index) throw ValidationError(path + " holds several clusters; choose one with --cluster");
    const auto& cs = j.at("clusters");
    if (*index < 0 || static_cast<std::size_t>(*index) >= cs.size())
      throw ValidationError("cluster index " + std::to_string(*index) + " out of range");
    nlohmann::json c = cs.at(static_cast<std::size_t>(*index));
    if (j.contains("threshold")) c["threshold"] = j["threshold"];
    return profile_from_json(layout, c);
  }
  return profile_from_json(layout, j);
}

int cmd_impulse(const std::string& dir, const std::string& profile_path, std::optional<int> index,
                const std::vector<std::string>& chosen) {
  const RunDir run = open_run(dir);
  const ClusterProfile cluster = read_profile(run.layout, profile_path, index);
  if (cluster.impulse_products().empty()) throw ValidationError("cluster has no impulse products");
  std::vector<std::pair<std::string, ClusterProfile>> per;
  ojson j = ojson::object();
  for (const auto& m : methods_or_all(chosen, run)) {
    per.emplace_back(m, impulse_rates(cluster, run.load(m), run.layout));
    j[m] = profile_to_json(run.layout, per.back().second);
  }
  write_text(run.dir / "impulse.csv", impulse_table_csv(run.layout, cluster, per));
  write_json(run.dir / "impulse.json", j);
  std::cout << read_text(run.dir / "impulse.csv");
  return 0;
}

struct UseCaseArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau;
  std::optional<std::size_t> shelves, essential, holdout;
};

int cmd_usecase3(const UseCaseArgs& a, int workers) {
  ExperimentConfig cfg = base_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.tau) cfg.tau = *a.tau;
  if (a.shelves) cfg.shelves = *a.shelves;
  if (a.essential) cfg.essential_count = *a.essential;
  if (a.holdout) cfg.holdout_count = *a.holdout;
  if (cfg.layout.empty() || cfg.cluster.empty()) throw ValidationError("usecase3 needs a config with layout and cluster");
  cfg.validate();
  const fs::path out = a.out.empty() ? cfg.resolve(cfg.output) : fs::path(a.out);

  const Layout layout = load_layout_file(cfg.resolve(cfg.layout));
  const ClusterProfile cluster = profile_from_json(layout, read_json(cfg.resolve(cfg.cluster)));
  std::vector<double> weights(layout.checkouts().size(), 1.0);
  if (!cfg.basket_mix.empty()) weights = load_basket_mix(layout, cfg.resolve(cfg.basket_mix)).checkout_weights;

  const auto t0 = std::chrono::steady_clock::now();
  const UseCase3Run uc = run_usecase3_experiment(layout, cluster, weights, cfg, cfg.seed, workers);
  ojson manifest = manifest_head("usecase3", cfg, layout);
  manifest["seeds"]["essential"] = derive_seed(cfg.seed, {stream::essential});
  manifest["seeds"]["holdout_conditions"] = derive_seed(cfg.seed, {stream::holdout_conditions});
  manifest["seeds"]["holdout"] = derive_seed(cfg.seed, {stream::holdout});
  manifest["seeds"]["evaluation"] = derive_seed(cfg.seed, {stream::evaluation});
  manifest["conditions"] = {{"source", "cluster"}, {"cluster", profile_to_json(layout, cluster)}};
  manifest["human_calibration"] = {{"spread", uc.generation.calibration->spread},
                                   {"achieved_ratio", uc.generation.calibration->achieved_ratio},
                                   {"batch", uc.generation.calibration->batch}};
  manifest["holdout"] = {{"file", "holdout.jsonl"}, {"count", uc.holdout.size()}};

  std::vector<std::pair<std::string, ClusterProfile>> per;
  ojson suggested = ojson::object();
  for (const auto& ch : uc.report.methods) {
    const ClusterProfile p = impulse_rates(cluster, uc.generation.get(method_from_name(ch.method)).trajectories, layout);
    per.emplace_back(ch.method, p);
    const Layout moved = reposition(layout, ch.product, ch.shelves, RepositionMode::move);
    write_text(out / ("layout_" + ch.method + ".json"), serialize_layout(moved));
    suggested[ch.method] = {{"file", "layout_" + ch.method + ".json"}, {"hash", hex64(layout_hash(moved))}};
  }
  manifest["suggested_layouts"] = std::move(suggested);
  ojson timings;
  timings["total"] = detail::seconds_since(t0);
  write_generation(out, layout, uc.generation, manifest, timings);
  write_trajectories(out / "holdout.jsonl", layout, uc.holdout);
  write_text(out / "impulse.csv", impulse_table_csv(layout, cluster, per));
  write_text(out / "profit.csv", profit_table_csv(uc.report));
  write_json(out / "usecase3.json", profit_report_json(layout, uc.report));
  std::cout << read_text(out / "profit.csv");
  return 0;
}

std::string csv_to_markdown(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, md;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::string row = "|";
    std::size_t cols = 0;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      row += " " + cell + " |";
      ++cols;
    }
    md += row + "\n";
    if (header) {
      md += "|";
      for (std::size_t i = 0; i < cols; ++i) md += " --- |";
      md += "\n";
      header = false;
    }
  }
  return md;
}

std::vector<std::string> sorted_files(const fs::path& dir, const std::string& ext) {
  std::vector<std::string> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

int cmd_report(const std::string& dir_arg, const std::string& out_arg) {
  const fs::path dir(dir_arg);
  if (!fs::is_directory(dir)) throw ValidationError("run directory " + dir.string() + " does not exist");
  const bool has_any = fs::exists(dir / "manifest.json") || fs::exists(dir / "divergence.csv") ||
                       fs::exists(dir / "impulse.csv") || fs::exists(dir / "profit.csv") ||
                       fs::is_directory(dir / "traffic") || fs::is_directory(dir / "heatmaps");
  if (!has_any) {
    std::cout << "nothing to report in " << dir.string() << "\n";
    return 2;
  }
  const RunDir run = open_run(dir);
  const auto& man = run.manifest;

  std::string md = "# Run report\n\n";
  md += "- command: " + man.value("command", std::string("?")) + "\n";
  md += "- tool version: " + man.value("version", std::string("?")) + "\n";
  md += "- config hash: " + man.value("config_hash", std::string("?")) + "\n";
  md += "- layout: " + run.layout.name() + " (hash " + hex64(layout_hash(run.layout)) + ")\n";
  if (man.contains("seeds")) md += "- seed: " + man["seeds"].value("experiment", nlohmann::json(0)).dump() + "\n";
  if (man.contains("human_calibration"))
    md += "- synthetic humans: spread " + man["human_calibration"]["spread"].dump() + ", length ratio " +
          man["human_calibration"]["achieved_ratio"].dump() + "\n";

  md += "\n## Trajectories\n\n| method | count | mean length | retention |\n| --- | --- | --- | --- |\n";
  char buf[128];
  for (const auto& m : run.methods) {
    const auto& info = man["methods"][m];
    std::snprintf(buf, sizeof buf, "| %s | %zu | %.2f | %.4f |\n", m.c_str(), info.value("count", std::size_t{0}),
                  info.value("mean_length", 0.0), info.value("retention_rate", 1.0));
    md += buf;
  }
  if (fs::exists(dir / "divergence.csv")) {
    std::string ref = "reference";
    if (fs::exists(dir / "analysis.json")) ref = read_json(dir / "analysis.json").value("reference", ref);
    md += "\n## Divergence from " + ref + " trajectories\n\n" + csv_to_markdown(read_text(dir / "divergence.csv"));
  }
  if (fs::exists(dir / "impulse.csv"))
    md += "\n## Impulse rates\n\n" + csv_to_markdown(read_text(dir / "impulse.csv"));
  if (fs::exists(dir / "profit.csv"))
    md += "\n## Average impulse profit per customer\n\n" + csv_to_markdown(read_text(dir / "profit.csv"));
  if (fs::exists(dir / "usecase3.json")) {
    const auto uc = read_json(dir / "usecase3.json");
    md += "\n## Repositioning choices\n\n| method | product | ranked by | shelves |\n| --- | --- | --- | --- |\n";
    for (const auto& m : uc.at("methods"))
      md += "| " + m.at("method").get<std::string>() + " | " + m.at("product").get<std::string>() + " | " +
            m.at("ranked_by").get<std::string>() + " | " + m.at("shelves").dump() + " |\n";
  }
  const auto heat = sorted_files(dir / "heatmaps", ".pgm");
  if (!heat.empty()) {
    md += "\n## Occupancy heatmaps\n\n";
    for (const auto& f : heat) md += "- heatmaps/" + f + "\n";
  }
  const auto traffic = sorted_files(dir / "traffic", ".csv");
  if (!traffic.empty()) {
    md += "\n## Shelf traffic (top 5 shelves)\n\n";
    for (const auto& f : traffic) {
      std::istringstream in(read_text(dir / "traffic" / f));
      std::string line;
      std::getline(in, line);
      std::vector<std::pair<double, std::string>> rows;
      while (std::getline(in, line)) {
        const auto pos = line.rfind(',');
        rows.emplace_back(std::stod(line.substr(pos + 1)), line);
      }
      std::stable_sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
      md += "### " + fs::path(f).stem().string() + "\n\n| col | row | category | visits | theta |\n| --- | --- | --- | --- | --- |\n";
      for (std::size_t i = 0; i < rows.size() && i < 5; ++i) {
        std::string r = rows[i].second;
        std::string cells = "|";
        std::istringstream cs(r);
        std::string c;
        while (std::getline(cs, c, ',')) cells += " " + c + " |";
        md += cells + "\n";
      }
      md += "\n";
    }
  }
  const fs::path out = out_arg.empty() ? dir / "report.md" : fs::path(out_arg);
  write_text(out, md);
  std::cout << "report written to " << out.string() << "\n";
  return 0;
}

int cmd_validate_layout(const std::string& path) {
  const Layout layout = load_layout_file(path);
  ojson j;
  j["ok"] = true;
  j["name"] = layout.name();
  j["width"] = layout.width();
  j["height"] = layout.height();
  j["categories"] = layout.category_count();
  j["shelves"] = layout.shelves().size();
  j["unoccupied_shelves"] = layout.unoccupied_shelves().size();
  j["hash"] = hex64(layout_hash(layout));
  std::cout << j.dump() << "\n";
  return 0;
}

void error_record(const char* kind, const std::string& message, int code) {
  std::cerr << ojson{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic shopper trajectories, traffic analytics and impulse-product placement"};
  app.set_version_flag("--version", std::string("storegrid ") + kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  int workers = 1;
  app.add_option("--workers", workers, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Generate trajectories for one or more methods");
  gen->add_option("--config", ga.config, "Experiment config (JSON)");
  gen->add_option("--layout", ga.layout, "Layout file");
  gen->add_option("--mix", ga.mix, "Basket mix file");
  gen->add_option("--method", ga.methods, "tsp, pnn, maxent or human (repeatable)");
  gen->add_option("--basket", ga.basket, "Comma-separated category ids; all trajectories use this basket");
  gen->add_option("--checkout", ga.checkout, "Checkout index for --basket");
  gen->add_option("--budget", ga.budget, "Step budget for --basket");
  gen->add_option("--count", ga.count, "Trajectories per method");
  gen->add_option("--seed", ga.seed, "Experiment seed");
  gen->add_option("--tau", ga.tau, "MaxEnt temperature");
  gen->add_option("--exponent", ga.exponent, "PNN distance exponent");
  gen->add_option("--detour-target", ga.detour_target, "Synthetic human mean detour (0.28 = 28 %)");
  gen->add_option("--min-reward", ga.min_reward, "MaxEnt retention threshold: a number or 'default'");
  gen->add_option("--budget-mode", ga.budget_mode, "MaxEnt budgets: none, ratio or matched");
  gen->add_option("--out", ga.out, "Output directory");

  std::string run_dir, reference = "human", out_file, profile, layout_path, baskets_path;
  std::vector<std::string> methods;
  std::optional<int> cluster_index;
  int k_max = 8;
  std::uint64_t cluster_seed = 0;
  double threshold = kImpulseThreshold;

  auto* ana = app.add_subcommand("analyze", "Occupancy heatmaps and divergence from a reference method");
  ana->add_option("run", run_dir, "Run directory")->required();
  ana->add_option("--reference", reference, "Reference method")->capture_default_str();

  auto* tra = app.add_subcommand("traffic", "Per-shelf traffic density");
  tra->add_option("run", run_dir, "Run directory")->required();
  tra->add_option("--method", methods, "Methods (default: all in the run)");

  auto* clu = app.add_subcommand("cluster", "Cluster weighted baskets and pick k by the elbow rule");
  clu->add_option("--layout", layout_path, "Layout file")->required();
  clu->add_option("--baskets", baskets_path, "Basket mix file")->required();
  clu->add_option("--k-max", k_max, "Largest k tried")->capture_default_str();
  clu->add_option("--seed", cluster_seed, "Seed for k-means++ restarts")->capture_default_str();
  clu->add_option("--threshold", threshold, "Impulse threshold on purchase probability")->capture_default_str();
  clu->add_option("--out", out_file, "Output file (default: stdout)");

  auto* imp = app.add_subcommand("impulse", "Impulse rates of a cluster under each method");
  imp->add_option("run", run_dir, "Run directory with essential-product trajectories")->required();
  imp->add_option("--profile", profile, "Cluster profile, or cluster output with --cluster")->required();
  imp->add_option("--cluster", cluster_index, "Cluster index inside a cluster output");
  imp->add_option("--method", methods, "Methods (default: all in the run)");

  UseCaseArgs ua;
  auto* uc = app.add_subcommand("usecase3", "Reposition the most profitable impulse product per method");
  uc->add_option("--config", ua.config, "Experiment config (JSON)")->required();
  uc->add_option("--out", ua.out, "Output directory");
  uc->add_option("--seed", ua.seed, "Experiment seed");
  uc->add_option("--tau", ua.tau, "MaxEnt temperature");
  uc->add_option("--shelves", ua.shelves, "Shelves to move the product to");
  uc->add_option("--essential-count", ua.essential, "Essential-product trajectories per method");
  uc->add_option("--holdout-count", ua.holdout, "Held-out synthetic human trajectories");

  auto* rep = app.add_subcommand("report", "Collect the tables and heatmaps of a run into report.md");
  rep->add_option("run", run_dir, "Run directory")->required();
  rep->add_option("--out", out_file, "Report file (default: <run>/report.md)");

  auto* val = app.add_subcommand("validate-layout", "Check a layout file");
  val->add_option("layout", layout_path, "Layout file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_record("validation", e.what(), 2);
    return 2;
  }

  try {
    if (*gen) return cmd_generate(ga, workers);
    if (*ana) return cmd_analyze(run_dir, reference, workers);
    if (*tra) return cmd_traffic(run_dir, methods);
    if (*clu) return cmd_cluster(layout_path, baskets_path, k_max, cluster_seed, threshold, out_file);
    if (*imp) return cmd_impulse(run_dir, profile, cluster_index, methods);
    if (*uc) return cmd_usecase3(ua, workers);
    if (*rep) return cmd_report(run_dir, out_file);
    if (*val) return cmd_validate_layout(layout_path);
  } catch (const ValidationError& e) {
    error_record("validation", e.what(), 2);
    return 2;
  } catch (const RuntimeError& e) {
    error_record("runtime", e.what(), 3);
    return 3;
  } catch (const std::exception& e) {
    error_record("runtime", e.what(), 3);
    return 3;
  }
  return 0;
}
