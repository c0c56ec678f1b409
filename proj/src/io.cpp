#include "quiverml/io.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "quiverml/errors.hpp"

namespace qml {

using nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

Complex scalar_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  throw ConfigError("expected a number or an [re, im] pair, got " + j.dump());
}

CVector vector_from_json(const json& j, int dim, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw ConfigError(std::string(what) + " must have " + std::to_string(dim) + " entries");
  }
  CVector v(dim);
  for (int k = 0; k < dim; ++k) v(k) = scalar_from_json(j[k]);
  return v;
}

bool has_negative_coefficient(const MetricSignature& sig) {
  if (sig.alpha < 0.0 || sig.path_default < 0.0) return true;
  for (const auto& [path, c] : sig.path_coeffs) {
    if (c < 0.0) return true;
  }
  return false;
}

std::vector<std::vector<double>> read_numeric_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw IoError("non-numeric row in " + path.string() + ": " + line);
    }
    first = false;
    rows.push_back(std::move(row));
  }
  return rows;
}

CVector take(const std::vector<double>& row, std::size_t& pos, int dim, bool complex) {
  CVector v(dim);
  for (int k = 0; k < dim; ++k) {
    v(k) = complex ? Complex(row[pos], row[pos + 1]) : Complex(row[pos], 0.0);
    pos += complex ? 2 : 1;
  }
  return v;
}

Dataset dataset_from_json(const json& j, const Machine& machine, const TrainConfig& train,
                          const std::filesystem::path& base_dir) {
  const int in_dim = machine.input_dim();
  const int out_dim = machine.output_dim();
  Dataset data;
  if (j.contains("samples")) {
    for (const auto& s : j.at("samples")) {
      if (!s.contains("x") || !s.contains("y")) throw ConfigError("each sample needs x and y");
      data.push_back({vector_from_json(s.at("x"), in_dim, "x"), vector_from_json(s.at("y"), out_dim, "y")});
    }
  } else if (j.contains("csv")) {
    std::filesystem::path p = j.at("csv").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    data = read_dataset_csv(p, in_dim, out_dim, get_or<bool>(j, "complex", false));
  } else if (j.contains("teacher")) {
    const json& t = j.at("teacher");
    TrainConfig tc = train;
    tc.seed = get_or<std::uint64_t>(t, "point_seed", train.seed + 1);
    const FramedRep teacher = initial_point(machine.tree().quiver_ptr(), tc);
    data = teacher_dataset(machine, teacher, train.signature, get_or<std::size_t>(t, "count", 20),
                           get_or<std::uint64_t>(t, "seed", 0), get_or<double>(t, "scale", 1.0));
    if (train.mode == ScalarMode::Real) {
      for (auto& s : data) {
        s.x = s.x.real().cast<Complex>();
        s.y = s.y.real().cast<Complex>();
      }
    }
  } else {
    throw ConfigError("data needs one of 'samples', 'csv', 'teacher'");
  }
  if (data.empty()) throw ConfigError("dataset is empty");
  return data;
}

}  // namespace

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

json quiver_to_json(const Quiver& q) {
  json v = json::array(), a = json::array();
  for (const auto& s : q.vertices()) v.push_back({{"id", s.id}, {"n", s.n}, {"d", s.d}, {"role", to_string(s.role)}});
  for (const auto& s : q.arrows()) a.push_back({{"id", s.id}, {"src", s.src}, {"dst", s.dst}});
  return {{"vertices", v}, {"arrows", a}};
}

std::shared_ptr<const Quiver> quiver_from_json(const json& j) {
  if (!j.is_object() || !j.contains("vertices")) throw ConfigError("quiver needs a vertex list");
  std::vector<VertexSpec> vs;
  std::vector<ArrowSpec> as;
  try {
    for (const auto& v : j.at("vertices")) {
      vs.push_back({v.at("id").get<int>(), v.at("n").get<int>(), v.at("d").get<int>(),
                    role_from_string(get_or<std::string>(v, "role", "plain"))});
    }
    if (j.contains("arrows")) {
      for (const auto& a : j.at("arrows")) {
        as.push_back({a.at("id").get<int>(), a.at("src").get<int>(), a.at("dst").get<int>()});
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("quiver: ") + e.what());
  }
  std::shared_ptr<const Quiver> q;
  try {
    q = std::make_shared<const Quiver>(std::move(vs), std::move(as));
    q->topological_order();
  } catch (const CycleError& e) {
    throw ConfigError(std::string("quiver must be acyclic: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("quiver: ") + e.what());
  }
  return q;
}

MetricSignature signature_from_json(const json& j, bool* learnable) {
  if (learnable) *learnable = false;
  if (j.is_string()) return MetricSignature::of(preset_from_string(j.get<std::string>()));
  if (j.is_number()) return MetricSignature::uniform(j.get<double>());
  if (!j.is_object()) throw ConfigError("signature must be a preset name, a number, or an object");
  MetricSignature sig;
  if (j.contains("preset")) {
    sig = MetricSignature::of(preset_from_string(j.at("preset").get<std::string>()));
  } else {
    sig.alpha = get_or<double>(j, "alpha", 1.0);
    sig.path_default = get_or<double>(j, "path_default", sig.alpha);
  }
  if (j.contains("alpha_paths")) {
    for (const auto& [key, value] : j.at("alpha_paths").items()) sig.path_coeffs[key] = value.get<double>();
  }
  if (learnable) *learnable = get_or<bool>(j, "learnable", false);
  return sig;
}

json signature_to_json(const MetricSignature& sig) {
  if (auto p = sig.preset()) return to_string(*p);
  json j = {{"alpha", sig.alpha}, {"path_default", sig.path_default}};
  if (!sig.path_coeffs.empty()) j["alpha_paths"] = sig.path_coeffs;
  return j;
}

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
    rows.push_back(row);
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

CMatrix matrix_from_json(const json& j) {
  try {
    const auto r = j.at("rows").get<Eigen::Index>();
    const auto c = j.at("cols").get<Eigen::Index>();
    const json& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != r) throw ConfigError("matrix row count mismatch");
    CMatrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      if (static_cast<Eigen::Index>(data[i].size()) != c) throw ConfigError("matrix column count mismatch");
      for (Eigen::Index k = 0; k < c; ++k) m(i, k) = scalar_from_json(data[i][k]);
    }
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("matrix: ") + e.what());
  }
}

Dataset read_dataset_csv(const std::filesystem::path& path, int in_dim, int out_dim, bool complex) {
  const std::size_t width = static_cast<std::size_t>(in_dim + out_dim) * (complex ? 2 : 1);
  Dataset data;
  for (const auto& row : read_numeric_rows(path)) {
    if (row.size() != width) {
      throw IoError(path.string() + ": expected " + std::to_string(width) + " columns per row");
    }
    std::size_t pos = 0;
    CVector x = take(row, pos, in_dim, complex);
    CVector y = take(row, pos, out_dim, complex);
    data.push_back({std::move(x), std::move(y)});
  }
  return data;
}

std::vector<CVector> read_inputs_csv(const std::filesystem::path& path, int in_dim, bool complex) {
  const std::size_t width = static_cast<std::size_t>(in_dim) * (complex ? 2 : 1);
  std::vector<CVector> out;
  for (const auto& row : read_numeric_rows(path)) {
    if (row.size() != width) {
      throw IoError(path.string() + ": expected " + std::to_string(width) + " columns per row");
    }
    std::size_t pos = 0;
    out.push_back(take(row, pos, in_dim, complex));
  }
  return out;
}

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig cfg;
  cfg.source = doc;
  if (!doc.contains("quiver")) throw ConfigError("config needs a quiver");
  cfg.quiver = quiver_from_json(doc.at("quiver"));
  if (!doc.contains("algorithm")) throw ConfigError("config needs an algorithm");
  cfg.algorithm = doc.at("algorithm").get<std::string>();

  TrainConfig& t = cfg.train;
  if (doc.contains("signature")) {
    t.signature = signature_from_json(doc.at("signature"), &t.learnable_signature);
  }
  validate_signature(t.signature, *cfg.quiver);
  const std::string mode = get_or<std::string>(doc, "mode", "complex");
  if (mode != "complex" && mode != "real") throw ConfigError("mode must be 'complex' or 'real'");
  t.mode = mode == "real" ? ScalarMode::Real : ScalarMode::Complex;
  if (doc.contains("train")) {
    const json& j = doc.at("train");
    t.learning_rate = get_or<double>(j, "lr", t.learning_rate);
    t.max_steps = get_or<int>(j, "steps", t.max_steps);
    t.seed = get_or<std::uint64_t>(j, "seed", t.seed);
    t.batch = get_or<std::size_t>(j, "batch", t.batch);
    t.refresh = get_or<int>(j, "refresh", t.refresh);
    t.target_cost = get_or<double>(j, "target_cost", t.target_cost);
    t.init_scale = get_or<double>(j, "init_scale", t.init_scale);
    t.precondition = get_or<bool>(j, "precondition", t.precondition);
  }
  t.validate();

  if (has_negative_coefficient(t.signature)) {
    for (const auto& v : cfg.quiver->vertices()) {
      if (v.n < v.d) {
        throw ConfigError("signature with negative coefficients assumes n >= d at every vertex; vertex " +
                          std::to_string(v.id) + " has n = " + std::to_string(v.n) +
                          " < d = " + std::to_string(v.d));
      }
    }
  }
  const ActivationTree tree = parse_algorithm(cfg.algorithm, cfg.quiver);
  if (doc.contains("data")) {
    const Machine machine(tree);
    cfg.data = dataset_from_json(doc.at("data"), machine, t, base_dir);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_json(path), path.parent_path());
}

json checkpoint_to_json(const Checkpoint& c) {
  const FramedRep& p = c.point;
  const Quiver& q = p.quiver();
  json arrows = json::object(), framing = json::object();
  for (std::size_t a = 0; a < q.num_arrows(); ++a) arrows[std::to_string(q.arrows()[a].id)] = matrix_to_json(p.w(a));
  for (std::size_t i = 0; i < q.num_vertices(); ++i) framing[std::to_string(q.vertices()[i].id)] = matrix_to_json(p.e(i));
  return {{"quiver", quiver_to_json(q)},
          {"algorithm", c.algorithm},
          {"signature", signature_to_json(c.signature)},
          {"mode", p.mode() == ScalarMode::Real ? "real" : "complex"},
          {"arrows", arrows},
          {"framing", framing}};
}

Checkpoint checkpoint_from_json(const json& j) {
  try {
    auto q = quiver_from_json(j.at("quiver"));
    const ScalarMode mode = j.at("mode").get<std::string>() == "real" ? ScalarMode::Real : ScalarMode::Complex;
    std::vector<CMatrix> arrows, framing;
    for (const auto& a : q->arrows()) arrows.push_back(matrix_from_json(j.at("arrows").at(std::to_string(a.id))));
    for (const auto& v : q->vertices()) framing.push_back(matrix_from_json(j.at("framing").at(std::to_string(v.id))));
    FramedRep p(q, std::move(arrows), std::move(framing), mode);
    return {j.at("algorithm").get<std::string>(), signature_from_json(j.at("signature")), std::move(p)};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  } catch (const ShapeError& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
}

json coords_to_json(const GrassmannCoords& c) {
  json blocks = json::object();
  for (std::size_t i = 0; i < c.W.size(); ++i) blocks[std::to_string(c.quiver->vertices()[i].id)] = matrix_to_json(c.W[i]);
  json mins = json::array();
  for (double e : c.min_eigenvalues()) mins.push_back(e);
  return {{"W", blocks}, {"min_eigenvalue", mins}};
}

}  // namespace qml
