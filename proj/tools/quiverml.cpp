// Command-line front end: check, train, eval, dim, map.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "quiverml/checks.hpp"
#include "quiverml/errors.hpp"
#include "quiverml/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qml;

namespace {

struct Common {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::string signature;
  bool real = false;
  double tolerance_scale = 1.0;
};

RunConfig load(const Common& c) {
  json doc = read_json(c.config);
  if (c.seed) doc["train"]["seed"] = *c.seed;
  if (!c.signature.empty()) {
    json parsed = json::parse(c.signature, nullptr, false);
    doc["signature"] = parsed.is_discarded() ? json(c.signature) : parsed;
  }
  if (c.real) doc["mode"] = "real";
  return parse_config(doc, fs::path(c.config).parent_path());
}

json base_report(const RunConfig& cfg) { return {{"config", cfg.source}}; }

int cmd_check(const Common& c) {
  const RunConfig cfg = load(c);
  const auto results = run_checks(cfg, cfg.train.seed, c.tolerance_scale);
  json report = base_report(cfg);
  report["checks"] = json::array();
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(22) << r.name
              << " deviation=" << std::setprecision(3) << r.deviation << " tolerance=" << r.tolerance;
    if (!r.detail.empty()) std::cout << "  (" << r.detail << ")";
    std::cout << "\n";
    report["checks"].push_back(to_json(r));
    ok = ok && r.passed;
  }
  report["passed"] = ok;
  write_json(fs::path(c.out) / "report.json", report);
  return ok ? 0 : 1;
}

int cmd_train(const Common& c) {
  const RunConfig cfg = load(c);
  const Machine machine(parse_algorithm(cfg.algorithm, cfg.quiver));
  const TrainResult r = train(machine, cfg.data, cfg.train);
  const fs::path out(c.out);
  write_text(out / "history.csv", r.history.csv());
  write_json(out / "checkpoint.json", checkpoint_to_json({cfg.algorithm, r.signature, r.point}));
  const auto& last = r.history.records.back();
  json report = base_report(cfg);
  report["history"] = (out / "history.csv").string();
  report["checkpoint"] = (out / "checkpoint.json").string();
  report["steps"] = last.step;
  report["initial_cost"] = r.history.records.front().cost;
  report["final_cost"] = last.cost;
  report["final_signature"] = signature_to_json(r.signature);
  const auto m = evaluate_metric(r.point, r.signature);
  json metrics = json::object();
  for (std::size_t i = 0; i < m.H.size(); ++i) {
    metrics[std::to_string(cfg.quiver->vertices()[i].id)] = matrix_to_json(m.H[i]);
  }
  report["metric"] = metrics;
  write_json(out / "report.json", report);
  std::cout << std::setprecision(17) << "steps " << last.step << "\ncost " << r.history.records.front().cost
            << " -> " << last.cost << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& inputs, const std::string& out, bool complex) {
  const Checkpoint ck = checkpoint_from_json(read_json(checkpoint));
  const Machine machine(parse_algorithm(ck.algorithm, ck.point.quiver_ptr()));
  const auto rows = read_inputs_csv(inputs, machine.input_dim(), complex);
  const Realization r = machine.realize(ck.point, ck.signature);
  std::ostringstream s;
  s << std::setprecision(17);
  for (const auto& x : rows) {
    const CVector y = machine.forward(r, x);
    for (Eigen::Index k = 0; k < y.size(); ++k) {
      if (k) s << ',';
      s << y(k).real();
      if (complex) s << ',' << y(k).imag();
    }
    s << '\n';
  }
  if (out.empty()) {
    std::cout << s.str();
  } else {
    write_text(out, s.str());
  }
  return 0;
}

int cmd_dim(const Common& c) {
  const auto q = quiver_from_json(read_json(c.config).at("quiver"));
  std::cout << "moduli_dimension " << moduli_dimension(*q) << "\n";
  std::cout << "representation_space_dimension " << representation_space_dimension(*q) << "\n";
  for (const auto& v : q->vertices()) {
    std::cout << "vertex " << v.id << " n=" << v.n << " d=" << v.d << " m=" << q->grassmann_ambient(v.id)
              << " N=" << q->path_framing_total(v.id) << "\n";
  }
  return 0;
}

int cmd_map(const std::string& checkpoint, const std::string& out) {
  const Checkpoint ck = checkpoint_from_json(read_json(checkpoint));
  const GrassmannCoords coords = grassmann_map(ck.point);
  const double residual = grassmann_inverse(coords).max_abs_diff(ck.point);
  json doc = coords_to_json(coords);
  doc["round_trip_residual"] = residual;
  write_json(fs::path(out) / "grassmann.json", doc);
  std::cout << std::setprecision(3) << "round_trip_residual " << residual << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural networks on framed quiver moduli"};
  app.require_subcommand(1);

  Common check_opts, train_opts, dim_opts;
  auto add_common = [](CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "JSON config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--seed", c.seed, "overrides train.seed");
    sub->add_option("--signature", c.signature, "preset name or JSON signature");
    sub->add_flag("--real", c.real, "real scalars");
    sub->add_option("--tolerance-scale", c.tolerance_scale, "multiplies every check tolerance");
  };
  auto* check = app.add_subcommand("check", "run the invariant suites");
  add_common(check, check_opts);
  auto* train_cmd = app.add_subcommand("train", "train and write history, checkpoint, report");
  add_common(train_cmd, train_opts);
  auto* dim = app.add_subcommand("dim", "print moduli dimensions");
  dim->add_option("--config", dim_opts.config, "JSON config")->required()->check(CLI::ExistingFile);

  std::string eval_ck, eval_inputs, eval_out;
  bool eval_complex = false;
  auto* eval = app.add_subcommand("eval", "forward pass over an input CSV");
  eval->add_option("--checkpoint", eval_ck)->required()->check(CLI::ExistingFile);
  eval->add_option("--inputs", eval_inputs)->required()->check(CLI::ExistingFile);
  eval->add_option("--out", eval_out, "predictions CSV (stdout if omitted)");
  eval->add_flag("--complex", eval_complex, "re,im column pairs");

  std::string map_ck, map_out = ".";
  auto* map = app.add_subcommand("map", "space-like Grassmannian coordinates of a checkpoint");
  map->add_option("--checkpoint", map_ck)->required()->check(CLI::ExistingFile);
  map->add_option("--out", map_out, "output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*check) return cmd_check(check_opts);
    if (*train_cmd) return cmd_train(train_opts);
    if (*dim) return cmd_dim(dim_opts);
    if (*eval) return cmd_eval(eval_ck, eval_inputs, eval_out, eval_complex);
    if (*map) return cmd_map(map_ck, map_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
