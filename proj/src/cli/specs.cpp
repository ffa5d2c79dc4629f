#include <algorithm>
#include <fstream>
#include <functional>
#include <set>

#include "csde/cli.hpp"
#include "csde/error.hpp"

namespace csde::cli {

namespace {

std::vector<double> per_axis(const json& j, const char* key, int dim) {
  const json& v = j.at(key);
  if (v.is_number()) return std::vector<double>(dim, v.get<double>());
  auto out = v.get<std::vector<double>>();
  require(int(out.size()) == dim, std::string("grid: '") + key + "' needs one entry per axis");
  return out;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }) == allowed.end())
      throw ValidationError(where + ": unknown key '" + it.key() + "'");
}

}  // namespace

Grid grid_from_json(const json& j) {
  require(j.is_object(), "grid: expected an object");
  try {
    check_keys(j, {"dim", "lo", "hi", "n", "nt", "t0", "t1", "boundary"}, "grid");
    Grid g;
    g.dim = j.at("dim").get<int>();
    require(g.dim >= 1 && g.dim <= 6, "grid: dim must lie in [1, 6]");
    g.lo = per_axis(j, "lo", g.dim);
    g.hi = per_axis(j, "hi", g.dim);
    const json& n = j.at("n");
    if (n.is_number()) g.nx.assign(g.dim, n.get<std::size_t>());
    else g.nx = n.get<std::vector<std::size_t>>();
    require(int(g.nx.size()) == g.dim, "grid: 'n' needs one entry per axis");
    g.nt = j.value("nt", std::size_t(0));
    g.t0 = j.value("t0", 0.0);
    g.t1 = j.value("t1", g.t0);
    const std::string b = j.value("boundary", std::string("dirichlet"));
    if (b == "periodic") g.boundary = Boundary::periodic;
    else if (b == "dirichlet") g.boundary = Boundary::dirichlet;
    else throw ValidationError("grid: boundary must be 'dirichlet' or 'periodic'");
    g.validate();
    return g;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("grid: ") + e.what());
  }
}

json grid_to_json(const Grid& g) {
  return {{"dim", g.dim}, {"lo", g.lo}, {"hi", g.hi}, {"n", g.nx}, {"nt", g.nt}, {"t0", g.t0}, {"t1", g.t1},
          {"boundary", g.boundary == Boundary::periodic ? "periodic" : "dirichlet"}};
}

Exponent exponent_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return Exponent::infinity();
    throw ValidationError("exponent: expected a number or \"inf\", got \"" + s + "\"");
  }
  require(j.is_number(), "exponent: expected a number or \"inf\"");
  Exponent e(j.get<double>());
  e.validate("exponent");
  return e;
}

ExponentPair pair_from_json(const json& j) {
  require(j.is_array() && j.size() == 2, "exponent pair: expected [p, q]");
  return {exponent_from_json(j[0]), exponent_from_json(j[1])};
}

json pair_to_json(const ExponentPair& e) {
  auto one = [](const Exponent& x) -> json {
    if (x.is_infinite()) return "inf";
    return x.value();
  };
  return json::array({one(e.p), one(e.q)});
}

drift::ApproxSpec approx_from_json(const json& j) {
  drift::ApproxSpec s;
  if (j.is_null()) return s;
  require(j.is_object(), "approx: expected an object");
  check_keys(j, {"n", "N", "order"}, "approx");
  if (j.contains("n")) s.n = j.at("n").get<int>();
  if (j.contains("N")) s.N = j.at("N").get<double>();
  const std::string order = j.value("order", std::string("truncate_then_mollify"));
  if (order == "truncate_then_mollify") s.order = drift::ApproxOrder::truncate_then_mollify;
  else if (order == "mollify_then_truncate") s.order = drift::ApproxOrder::mollify_then_truncate;
  else throw ValidationError("approx: unknown order '" + order + "'");
  return s;
}

ExperimentSpec ExperimentSpec::parse(const json& doc) {
  require(doc.is_object(), "spec: expected a JSON object");
  ExperimentSpec spec;
  spec.source = doc;
  try {
    check_keys(doc, {"schema", "name", "seed", "output_dir", "grid", "stages"}, "spec");
    require(doc.contains("schema") && doc.at("schema") == kSchemaId,
            std::string("spec: 'schema' must be \"") + kSchemaId + "\"");
    require(doc.contains("name") && doc.at("name").is_string(), "spec: 'name' must be a string");
    spec.name = doc.at("name").get<std::string>();
    require(!spec.name.empty(), "spec: empty name");
    if (doc.contains("seed")) {
      require(doc.at("seed").is_number_integer() && doc.at("seed").get<std::int64_t>() >= 0,
              "spec: 'seed' must be a nonnegative integer");
      spec.seed = doc.at("seed").get<std::uint64_t>();
    }
    if (doc.contains("output_dir")) spec.output_dir = doc.at("output_dir").get<std::string>();
    if (doc.contains("grid")) {
      spec.grid = doc.at("grid");
      grid_from_json(spec.grid);
    }
    require(doc.contains("stages") && doc.at("stages").is_array(), "spec: 'stages' must be an array");
    std::set<std::string> ids;
    const auto& ops = known_ops();
    for (const auto& s : doc.at("stages")) {
      require(s.is_object(), "spec: every stage must be an object");
      check_keys(s, {"id", "op", "params", "inputs"}, "stage");
      StageSpec st;
      st.id = s.at("id").get<std::string>();
      st.op = s.at("op").get<std::string>();
      require(!st.id.empty() && st.id.find('/') == std::string::npos, "stage: id must be a nonempty name");
      require(ids.insert(st.id).second, "spec: duplicate stage id '" + st.id + "'");
      require(std::find(ops.begin(), ops.end(), st.op) != ops.end(),
              "stage '" + st.id + "': unknown op '" + st.op + "'");
      if (s.contains("params")) {
        require(s.at("params").is_object(), "stage '" + st.id + "': params must be an object");
        st.params = s.at("params");
      }
      if (s.contains("inputs")) st.inputs = s.at("inputs").get<std::vector<std::string>>();
      spec.stages.push_back(std::move(st));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("spec: ") + e.what());
  }
  spec.order();
  return spec;
}

ExperimentSpec ExperimentSpec::load(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open spec " + path.string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::exception& e) {
    throw ValidationError("spec " + path.string() + ": " + e.what());
  }
  return parse(doc);
}

std::string ExperimentSpec::hash() const { return sha256_hex(source.dump()); }

std::vector<std::size_t> ExperimentSpec::order() const {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < stages.size(); ++i) index[stages[i].id] = i;
  std::vector<int> state(stages.size(), 0);
  std::vector<std::size_t> out;
  std::function<void(std::size_t)> visit = [&](std::size_t i) {
    if (state[i] == 2) return;
    if (state[i] == 1) throw ValidationError("spec: stage dependencies form a cycle at '" + stages[i].id + "'");
    state[i] = 1;
    for (const auto& in : stages[i].inputs) {
      auto it = index.find(in);
      if (it == index.end()) throw ValidationError("stage '" + stages[i].id + "': unknown input '" + in + "'");
      visit(it->second);
    }
    state[i] = 2;
    out.push_back(i);
  };
  for (std::size_t i = 0; i < stages.size(); ++i) visit(i);
  return out;
}

json experiment_schema() {
  json stage = {{"type", "object"},
                {"required", {"id", "op"}},
                {"additionalProperties", false},
                {"properties",
                 {{"id", {{"type", "string"}, {"pattern", "^[^/]+$"}}},
                  {"op", {{"enum", known_ops()}}},
                  {"params", {{"type", "object"}}},
                  {"inputs", {{"type", "array"}, {"items", {{"type", "string"}}}}}}}};
  json grid = {{"type", "object"},
               {"required", {"dim", "lo", "hi", "n"}},
               {"properties",
                {{"dim", {{"type", "integer"}, {"minimum", 1}, {"maximum", 6}}},
                 {"lo", {{"type", {"number", "array"}}}},
                 {"hi", {{"type", {"number", "array"}}}},
                 {"n", {{"type", {"integer", "array"}}}},
                 {"nt", {{"type", "integer"}, {"minimum", 0}}},
                 {"t0", {{"type", "number"}}},
                 {"t1", {{"type", "number"}}},
                 {"boundary", {{"enum", {"dirichlet", "periodic"}}}}}}};
  return {{"$schema", "https://json-schema.org/draft/2020-12/schema"},
          {"$id", kSchemaId},
          {"type", "object"},
          {"required", {"schema", "name", "stages"}},
          {"additionalProperties", false},
          {"properties",
           {{"schema", {{"const", kSchemaId}}},
            {"name", {{"type", "string"}, {"minLength", 1}}},
            {"seed", {{"type", "integer"}, {"minimum", 0}}},
            {"output_dir", {{"type", "string"}}},
            {"grid", grid},
            {"stages", {{"type", "array"}, {"items", stage}}}}}};
}

}  // namespace csde::cli
