#include "kantab/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "kantab/error.hpp"

namespace kantab::io {

using nlohmann::json;

namespace {

class DocError {
 public:
  explicit DocError(std::string_view source) : source_(source) {}
  [[noreturn]] void operator()(const std::string& path, const std::string& what) const {
    fail(ErrorKind::Parse, source_ + ": " + path + ": " + what);
  }

 private:
  std::string source_;
};

json parse_json(std::string_view text, std::string_view source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream msg;
    msg << source << ":" << line << ":" << col << ": malformed JSON (" << e.what() << ")";
    fail(ErrorKind::Parse, msg.str());
  }
}

void expect_keys(const json& obj, const std::set<std::string>& allowed,
                 const std::set<std::string>& required, const std::string& path,
                 const DocError& err) {
  if (!obj.is_object()) err(path, "expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) err(path, "unknown field '" + key + "'");
  for (const auto& key : required)
    if (!obj.contains(key)) err(path, "missing field '" + key + "'");
}

double parse_number(const json& v, const std::string& path, const DocError& err) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size())
      err(path, "'" + s + "' is not a decimal number");
    return out;
  }
  err(path, "expected a number or decimal string");
}

std::vector<double> parse_vector(const json& v, std::size_t expected, const std::string& path,
                                 const DocError& err) {
  if (!v.is_array()) err(path, "expected an array");
  if (expected != 0 && v.size() != expected)
    err(path, "expected " + std::to_string(expected) + " entries");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(parse_number(v[i], path + "[" + std::to_string(i) + "]", err));
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Parse, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Alphabet parse_alphabet(const json& v, const DocError& err) {
  if (!v.is_array() || v.empty()) err("alphabet", "expected a nonempty array of names");
  std::vector<std::string> names;
  for (const auto& s : v) {
    if (!s.is_string()) err("alphabet", "symbol names must be strings");
    names.push_back(s.get<std::string>());
  }
  try {
    return Alphabet(std::move(names));
  } catch (const Error& e) {
    err("alphabet", e.what());
  }
}

Symbol parse_label(const Alphabet& alphabet, const json& v, const std::string& path,
                   const DocError& err) {
  if (!v.is_string()) err(path, "label must be a symbol name");
  try {
    return alphabet.index_of(v.get<std::string>());
  } catch (const Error& e) {
    err(path, e.what());
  }
}

AffineMap parse_map(const json& obj, std::size_t d, const std::string& path,
                    const DocError& err) {
  AffineMap m;
  const json& rows = obj.at("matrix");
  if (!rows.is_array() || rows.size() != d) err(path + ".matrix", "expected a square matrix");
  for (std::size_t r = 0; r < d; ++r) {
    auto row = parse_vector(rows[r], d, path + ".matrix[" + std::to_string(r) + "]", err);
    m.matrix.insert(m.matrix.end(), row.begin(), row.end());
  }
  m.offset = parse_vector(obj.at("offset"), d, path + ".offset", err);
  return m;
}

}  // namespace

std::string format_probability(double p) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), p);
  return std::string(buf, ptr);
}

LabeledMarkovChain parse_chain(std::string_view text, std::string_view source) {
  const DocError err(source);
  const json doc = parse_json(text, source);
  expect_keys(doc, {"schema", "alphabet", "states", "initial", "transitions"},
              {"schema", "alphabet", "states", "initial", "transitions"}, "$", err);
  if (doc["schema"] != kChainSchema)
    err("schema", "expected \"" + std::string(kChainSchema) + "\"");

  LabeledMarkovChain chain;
  chain.alphabet = parse_alphabet(doc["alphabet"], err);

  const json& states = doc["states"];
  if (!states.is_array() || states.empty()) err("states", "expected a nonempty array");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::string path = "states[" + std::to_string(i) + "]";
    expect_keys(states[i], {"id", "label"}, {"id", "label"}, path, err);
    if (!states[i]["id"].is_string()) err(path + ".id", "expected a string");
    const auto id = states[i]["id"].get<std::string>();
    if (!index.emplace(id, i).second) err(path + ".id", "duplicate state id '" + id + "'");
    chain.labels.push_back(parse_label(chain.alphabet, states[i]["label"], path + ".label", err));
  }
  const std::size_t n = states.size();
  auto lookup = [&](const std::string& id, const std::string& path) {
    auto it = index.find(id);
    if (it == index.end()) err(path, "unknown state id '" + id + "'");
    return it->second;
  };

  chain.initial.assign(n, 0.0);
  const json& initial = doc["initial"];
  if (!initial.is_object()) err("initial", "expected an object keyed by state id");
  for (const auto& [id, value] : initial.items())
    chain.initial[lookup(id, "initial")] = parse_number(value, "initial." + id, err);

  chain.transition = Matrix(n);
  const json& tr = doc["transitions"];
  if (!tr.is_object() || tr.size() != 1 || !(tr.contains("dense") || tr.contains("sparse")))
    err("transitions", "expected exactly one of \"dense\" or \"sparse\"");
  if (tr.contains("dense")) {
    const json& rows = tr["dense"];
    if (!rows.is_array() || rows.size() != n)
      err("transitions.dense", "expected " + std::to_string(n) + " rows");
    for (std::size_t i = 0; i < n; ++i) {
      auto row = parse_vector(rows[i], n, "transitions.dense[" + std::to_string(i) + "]", err);
      std::copy(row.begin(), row.end(), chain.transition.row(i).begin());
    }
  } else {
    const json& triplets = tr["sparse"];
    if (!triplets.is_array()) err("transitions.sparse", "expected an array of triplets");
    for (std::size_t k = 0; k < triplets.size(); ++k) {
      const std::string path = "transitions.sparse[" + std::to_string(k) + "]";
      const json& t = triplets[k];
      if (!t.is_array() || t.size() != 3 || !t[0].is_string() || !t[1].is_string())
        err(path, "expected [from, to, probability]");
      chain.transition(lookup(t[0].get<std::string>(), path),
                       lookup(t[1].get<std::string>(), path)) = parse_number(t[2], path, err);
    }
  }

  auto report = validate_chain(chain);
  if (!report.empty()) {
    std::string msg = std::string(source) + ": invalid Markov chain:";
    for (const auto& v : report) msg += "\n  " + v.field + ": " + v.message;
    fail(ErrorKind::Validation, msg);
  }
  return chain;
}

LabeledMarkovChain load_chain(const std::string& path) { return parse_chain(read_file(path), path); }

std::string serialize_chain(const LabeledMarkovChain& chain,
                            const std::vector<std::string>& state_ids) {
  const std::size_t n = chain.n_states();
  std::vector<std::string> ids = state_ids;
  if (ids.empty())
    for (std::size_t i = 0; i < n; ++i) ids.push_back("s" + std::to_string(i));
  if (ids.size() != n) fail(ErrorKind::InvalidArgument, "state id count mismatch");

  json doc;
  doc["schema"] = kChainSchema;
  doc["alphabet"] = chain.alphabet.names();
  json states = json::array();
  json initial = json::object();
  json rows = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    states.push_back({{"id", ids[i]}, {"label", chain.alphabet.name(chain.labels[i])}});
    initial[ids[i]] = format_probability(chain.initial[i]);
    json row = json::array();
    for (double p : chain.transition.row(i)) row.push_back(format_probability(p));
    rows.push_back(std::move(row));
  }
  doc["states"] = std::move(states);
  doc["initial"] = std::move(initial);
  doc["transitions"] = {{"dense", std::move(rows)}};
  return doc.dump(2) + "\n";
}

void save_chain(const std::string& path, const LabeledMarkovChain& chain,
                const std::vector<std::string>& state_ids) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
  out << serialize_chain(chain, state_ids);
}

SystemDocument parse_system(std::string_view text, std::string_view source) {
  const DocError err(source);
  const json doc = parse_json(text, source);
  expect_keys(doc, {"schema", "name", "alphabet", "box", "regions", "default", "control"},
              {"schema", "alphabet", "box", "regions"}, "$", err);
  if (doc["schema"] != kSystemSchema)
    err("schema", "expected \"" + std::string(kSystemSchema) + "\"");
  const std::string name = doc.contains("name") && doc["name"].is_string()
                               ? doc["name"].get<std::string>()
                               : std::string(source);
  const Alphabet alphabet = parse_alphabet(doc["alphabet"], err);

  expect_keys(doc["box"], {"lower", "upper"}, {"lower", "upper"}, "box", err);
  const auto lower = parse_vector(doc["box"]["lower"], 0, "box.lower", err);
  const auto upper = parse_vector(doc["box"]["upper"], lower.size(), "box.upper", err);
  const std::size_t d = lower.size();
  if (d == 0) err("box", "dimension must be at least 1");
  for (std::size_t k = 0; k < d; ++k)
    if (!(lower[k] < upper[k])) err("box", "lower must be below upper in every dimension");
  Box space = Box::closed(lower, upper);

  std::vector<Region> regions;
  const json& rs = doc["regions"];
  if (!rs.is_array()) err("regions", "expected an array");
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const std::string path = "regions[" + std::to_string(i) + "]";
    expect_keys(rs[i], {"name", "lower", "upper", "matrix", "offset", "label"},
                {"lower", "upper", "matrix", "offset", "label"}, path, err);
    Region r;
    r.name = rs[i].contains("name") ? rs[i]["name"].get<std::string>() : "R" + std::to_string(i);
    const auto lo = parse_vector(rs[i]["lower"], d, path + ".lower", err);
    const auto hi = parse_vector(rs[i]["upper"], d, path + ".upper", err);
    for (std::size_t k = 0; k < d; ++k)
      if (!(lo[k] < hi[k])) err(path, "region must have positive volume");
    r.area = Box::half_open(lo, hi, &space);
    r.map = parse_map(rs[i], d, path, err);
    r.label = parse_label(alphabet, rs[i]["label"], path + ".label", err);
    regions.push_back(std::move(r));
  }
  std::optional<DefaultRule> fallback;
  if (doc.contains("default")) {
    expect_keys(doc["default"], {"matrix", "offset", "label"}, {"matrix", "offset", "label"},
                "default", err);
    fallback = DefaultRule{parse_map(doc["default"], d, "default", err),
                           parse_label(alphabet, doc["default"]["label"], "default.label", err)};
  }

  SystemDocument out{DynamicalSystem(name, space, alphabet, std::move(regions), fallback),
                     std::nullopt};
  if (doc.contains("control")) {
    const json& c = doc["control"];
    expect_keys(c, {"dimension", "actions", "reward_label"}, {"dimension", "actions"}, "control",
                err);
    if (!c["dimension"].is_number_unsigned() || c["dimension"].get<std::size_t>() >= d)
      err("control.dimension", "expected a coordinate index");
    ControlledSystem cs{out.system, parse_vector(c["actions"], 0, "control.actions", err),
                        c["dimension"].get<std::size_t>(), 0};
    if (cs.actions.empty()) err("control.actions", "expected at least one action");
    if (c.contains("reward_label"))
      cs.reward_label = parse_label(alphabet, c["reward_label"], "control.reward_label", err);
    out.controlled = std::move(cs);
  }
  return out;
}

SystemDocument load_system(const std::string& path) { return parse_system(read_file(path), path); }

std::string benchmark_system_document() {
  const DynamicalSystem sys = benchmark_system();
  json doc;
  doc["schema"] = kSystemSchema;
  doc["name"] = sys.name();
  doc["alphabet"] = sys.alphabet().names();
  std::vector<double> lo, hi;
  for (const auto& i : sys.space().dims) {
    lo.push_back(i.lo);
    hi.push_back(i.hi);
  }
  doc["box"] = {{"lower", lo}, {"upper", hi}};
  json regions = json::array();
  for (const auto& r : sys.regions()) {
    std::vector<double> rlo, rhi;
    for (const auto& i : r.area.dims) {
      rlo.push_back(i.lo);
      rhi.push_back(i.hi);
    }
    const std::size_t d = r.map.dimension();
    json matrix = json::array();
    for (std::size_t k = 0; k < d; ++k)
      matrix.push_back(std::vector<double>(r.map.matrix.begin() + k * d,
                                           r.map.matrix.begin() + (k + 1) * d));
    regions.push_back({{"name", r.name},
                       {"lower", rlo},
                       {"upper", rhi},
                       {"matrix", matrix},
                       {"offset", r.map.offset},
                       {"label", sys.alphabet().name(r.label)}});
  }
  doc["regions"] = std::move(regions);
  const ControlledSystem cs = benchmark_controlled_system();
  doc["control"] = {{"dimension", cs.actuated_dim},
                    {"actions", cs.actions},
                    {"reward_label", sys.alphabet().name(cs.reward_label)}};
  return doc.dump(2) + "\n";
}

std::vector<std::string> word_ids(const Abstraction& abs) {
  std::vector<std::string> ids;
  for (const auto& w : abs.partition.words()) ids.push_back(format_word(abs.chain.alphabet, w));
  return ids;
}

namespace {

json words_json(const Alphabet& alphabet, const AdaptivePartition& p) {
  json out = json::array();
  for (const auto& w : p.words()) out.push_back(format_word(alphabet, w));
  return out;
}

}  // namespace

json trace_to_json(const DynamicalSystem& sys, const RefinementTrace& trace) {
  const Alphabet& a = sys.alphabet();
  json iterations = json::array();
  for (const auto& rec : trace.iterations) {
    json candidates = json::array();
    for (const auto& c : rec.candidates) {
      candidates.push_back({{"split", format_word(a, c.split_word)},
                            {"partition", words_json(a, c.partition)},
                            {"distance", c.distance}});
    }
    json entry = {{"iteration", rec.iteration},
                  {"partition", words_json(a, rec.abstraction.partition)},
                  {"measures", rec.abstraction.measures},
                  {"deterministic", rec.deterministic},
                  {"candidates", std::move(candidates)}};
    if (rec.chosen) {
      entry["chosen"] = *rec.chosen;
      entry["chosen_distance"] = rec.candidates[*rec.chosen].distance;
    } else {
      entry["chosen"] = nullptr;
    }
    iterations.push_back(std::move(entry));
  }
  return {{"epsilon", trace.epsilon},
          {"horizon", trace.horizon},
          {"determinism_band", trace.determinism_band},
          {"stop", to_string(trace.stop)},
          {"iterations", std::move(iterations)}};
}

json control_to_json(const DynamicalSystem& sys, const ControlReport& report) {
  const Alphabet& a = sys.alphabet();
  json rows = json::array();
  for (const auto& row : report.rows) {
    json policy = json::object();
    for (std::size_t i = 0; i < row.solution.policy.words.size(); ++i)
      policy[format_word(a, row.solution.policy.words[i])] = row.solution.policy.actions[i];
    rows.push_back({{"iteration", row.iteration},
                    {"partition", words_json(a, row.partition)},
                    {"policy", std::move(policy)},
                    {"values", row.solution.values},
                    {"expected_reward", row.evaluation.mean},
                    {"std_error", row.evaluation.std_error}});
  }
  const PolicyEvaluation* e = report.rows.empty() ? nullptr : &report.rows.front().evaluation;
  return {{"rows", std::move(rows)},
          {"gamma", e ? e->gamma : 0.0},
          {"trajectories", e ? e->trajectories : 0},
          {"length", e ? e->length : 0},
          {"reward_indexing", e ? describe(e->indexing) : ""},
          {"non_decreasing_within_2_pooled_se", report.non_decreasing}};
}

std::string format_control_table(const DynamicalSystem& sys, const ControlReport& report) {
  std::ostringstream out;
  const Alphabet& a = sys.alphabet();
  if (!report.rows.empty()) {
    const auto& e = report.rows.front().evaluation;
    out << "# gamma " << e.gamma << ", " << e.trajectories << " trajectories x " << e.length
        << " steps, reward " << describe(e.indexing) << "\n";
  }
  out << std::left << std::setw(6) << "k" << std::setw(52) << "controller" << "expected reward\n";
  for (const auto& row : report.rows) {
    std::string policy;
    for (std::size_t i = 0; i < row.solution.policy.words.size(); ++i) {
      if (i) policy += ", ";
      policy += format_word(a, row.solution.policy.words[i]) + "->" +
                format_probability(row.solution.policy.actions[i]);
    }
    std::ostringstream reward;
    reward << std::fixed << std::setprecision(4) << row.evaluation.mean << " +/- "
           << row.evaluation.std_error;
    out << std::setw(6) << ("k=" + std::to_string(row.iteration)) << std::setw(52) << policy
        << reward.str() << "\n";
  }
  out << "# non-decreasing within 2 pooled standard errors: "
      << (report.non_decreasing ? "yes" : "no") << "\n";
  return out.str();
}

}  // namespace kantab::io
