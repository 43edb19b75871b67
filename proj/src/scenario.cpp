#include "fermidyn/scenario.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace fermidyn {

using nlohmann::json;

HbarConvention Scenario::convention() const {
  if (hbar_convention == "bulk") return HbarConvention::Bulk;
  if (hbar_convention == "rpa") return HbarConvention::Rpa;
  throw ConfigError("hbar_convention must be \"bulk\" or \"rpa\", got \"" + hbar_convention + "\"");
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& path,
                    bool strict) {
  if (!strict) return;
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError("unknown key \"" + path + it.key() + "\" in scenario (strict mode)");
}

KVec parse_kvec(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() > 3 || j.empty())
    throw ConfigError("field " + path + " must be an integer vector of length 1..3");
  KVec k{0, 0, 0};
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer()) throw ConfigError("field " + path + " must be integer-valued");
    k[i] = j[i].get<int>();
  }
  return k;
}

std::map<KVec, double> parse_coeffs(const json& j, const std::string& path, bool strict) {
  std::map<KVec, double> coeffs;
  if (!j.is_array()) throw ConfigError("field " + path + " must be an array of {k, v} entries");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "].";
    reject_unknown(j[i], {"k", "v"}, p, strict);
    if (!j[i].contains("k") || !j[i].contains("v"))
      throw ConfigError("entry " + p + " needs both \"k\" and \"v\"");
    coeffs[parse_kvec(j[i]["k"], p + "k")] = j[i]["v"].get<double>();
  }
  return coeffs;
}

json coeffs_to_json(const std::map<KVec, double>& coeffs) {
  json arr = json::array();
  for (const auto& [k, v] : coeffs) arr.push_back(json{{"k", {k[0], k[1], k[2]}}, {"v", v}});
  return arr;
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, bool strict) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  Scenario s;
  reject_unknown(j,
                 {"schema_version", "seed", "dimension", "hbar_convention", "k_f",
                  "lattice_cutoff", "potential", "trap", "time", "hf", "rpa", "vlasov",
                  "initial_state", "observable", "compare_sizes", "compare_fill", "output_dir"},
                 "", strict);
  get_if(j, "schema_version", s.schema_version);
  get_if(j, "seed", s.seed);
  get_if(j, "dimension", s.dimension);
  get_if(j, "hbar_convention", s.hbar_convention);
  if (j.contains("k_f")) s.k_f = j["k_f"].get<double>();
  if (j.contains("lattice_cutoff")) s.lattice_cutoff = j["lattice_cutoff"].get<double>();
  if (j.contains("potential")) {
    const json& p = j["potential"];
    reject_unknown(p, {"coeffs", "rpa_strict"}, "potential.", strict);
    if (p.contains("coeffs")) s.potential_coeffs = parse_coeffs(p["coeffs"], "potential.coeffs", strict);
    get_if(p, "rpa_strict", s.rpa_strict);
  }
  if (j.contains("trap")) {
    const json& t = j["trap"];
    reject_unknown(t, {"omega", "caps", "n_target", "energy", "hbar"}, "trap.", strict);
    ScenarioTrap trap;
    get_if(t, "omega", trap.omega);
    if (t.contains("caps")) trap.caps = t["caps"].get<std::array<int, 3>>();
    if (t.contains("n_target")) trap.n_target = t["n_target"].get<long>();
    get_if(t, "energy", trap.energy);
    get_if(t, "hbar", trap.hbar);
    s.trap = trap;
  }
  if (j.contains("time")) {
    const json& t = j["time"];
    reject_unknown(t, {"t_final", "dt"}, "time.", strict);
    ScenarioTime tm;
    get_if(t, "t_final", tm.t_final);
    get_if(t, "dt", tm.dt);
    if (!(tm.t_final >= 0) || !(tm.dt > 0))
      throw ConfigError("time grid must satisfy t_final >= 0, dt > 0");
    s.time = tm;
  }
  if (j.contains("hf")) {
    const json& h = j["hf"];
    reject_unknown(h, {"include_exchange", "midpoint_iters", "tol", "snapshot_stride"}, "hf.",
                   strict);
    get_if(h, "include_exchange", s.hf.include_exchange);
    get_if(h, "midpoint_iters", s.hf.midpoint_iters);
    get_if(h, "tol", s.hf.tol);
    get_if(h, "snapshot_stride", s.hf.snapshot_stride);
  }
  if (j.contains("rpa")) {
    const json& r = j["rpa"];
    reject_unknown(r, {"patches", "delta"}, "rpa.", strict);
    get_if(r, "patches", s.rpa.patches);
    get_if(r, "delta", s.rpa.delta);
  }
  if (j.contains("vlasov")) {
    const json& v = j["vlasov"];
    reject_unknown(v, {"nx", "s_max", "kick"}, "vlasov.", strict);
    get_if(v, "nx", s.vlasov.nx);
    get_if(v, "s_max", s.vlasov.s_max);
    get_if(v, "kick", s.vlasov.kick);
    if (s.vlasov.kick != "cubic" && s.vlasov.kick != "spectral")
      throw ConfigError("vlasov.kick must be \"cubic\" or \"spectral\"");
  }
  if (j.contains("initial_state")) {
    const json& i = j["initial_state"];
    reject_unknown(i, {"type", "well", "n_particles"}, "initial_state.", strict);
    ScenarioInitial ini;
    get_if(i, "type", ini.type);
    if (i.contains("well")) ini.well = parse_coeffs(i["well"], "initial_state.well", strict);
    get_if(i, "n_particles", ini.n_particles);
    if (ini.type != "fermi-ball" && ini.type != "well-ground-state")
      throw ConfigError("initial_state.type must be \"fermi-ball\" or \"well-ground-state\"");
    s.initial_state = ini;
  }
  if (j.contains("observable")) {
    const json& o = j["observable"];
    reject_unknown(o, {"alpha", "beta", "t"}, "observable.", strict);
    ScenarioObservable obs;
    get_if(o, "alpha", obs.alpha);
    get_if(o, "beta", obs.beta);
    get_if(o, "t", obs.t);
    s.observable = obs;
  }
  get_if(j, "compare_sizes", s.compare_sizes);
  get_if(j, "compare_fill", s.compare_fill);
  get_if(j, "output_dir", s.output_dir);

  if (s.dimension < 1 || s.dimension > 3) throw ConfigError("dimension must be 1, 2 or 3");
  s.convention();                                   // validates the name
  Potential::from_coeffs(s.potential_coeffs, s.rpa_strict);  // validates symmetry/sign
  if (s.initial_state) Potential::from_coeffs(s.initial_state->well, false);
  if (s.lattice_cutoff && s.k_f && *s.lattice_cutoff < *s.k_f)
    throw ConfigError("lattice_cutoff below k_f: referenced modes do not exist");
  if (s.lattice_cutoff) {
    for (const auto& [k, v] : s.potential_coeffs) {
      (void)v;
      if (norm(k) > *s.lattice_cutoff)
        throw ConfigError("potential mode " + to_string(k) + " outside the lattice cutoff");
    }
  }
  return s;
}

Scenario parse_scenario(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), strict);
}

std::string serialize_scenario(const Scenario& s) {
  json j;
  j["schema_version"] = s.schema_version;
  j["seed"] = s.seed;
  j["dimension"] = s.dimension;
  j["hbar_convention"] = s.hbar_convention;
  if (s.k_f) j["k_f"] = *s.k_f;
  if (s.lattice_cutoff) j["lattice_cutoff"] = *s.lattice_cutoff;
  j["potential"] = {{"coeffs", coeffs_to_json(s.potential_coeffs)}, {"rpa_strict", s.rpa_strict}};
  if (s.trap) {
    json t;
    t["omega"] = s.trap->omega;
    if (s.trap->caps) t["caps"] = *s.trap->caps;
    if (s.trap->n_target) t["n_target"] = *s.trap->n_target;
    t["energy"] = s.trap->energy;
    t["hbar"] = s.trap->hbar;
    j["trap"] = t;
  }
  if (s.time) j["time"] = {{"t_final", s.time->t_final}, {"dt", s.time->dt}};
  j["hf"] = {{"include_exchange", s.hf.include_exchange},
             {"midpoint_iters", s.hf.midpoint_iters},
             {"tol", s.hf.tol},
             {"snapshot_stride", s.hf.snapshot_stride}};
  j["rpa"] = {{"patches", s.rpa.patches}, {"delta", s.rpa.delta}};
  j["vlasov"] = {{"nx", s.vlasov.nx}, {"s_max", s.vlasov.s_max}, {"kick", s.vlasov.kick}};
  if (s.initial_state) {
    json i;
    i["type"] = s.initial_state->type;
    i["well"] = coeffs_to_json(s.initial_state->well);
    i["n_particles"] = s.initial_state->n_particles;
    j["initial_state"] = i;
  }
  if (s.observable)
    j["observable"] = {{"alpha", s.observable->alpha},
                       {"beta", s.observable->beta},
                       {"t", s.observable->t}};
  if (!s.compare_sizes.empty()) j["compare_sizes"] = s.compare_sizes;
  j["compare_fill"] = s.compare_fill;
  j["output_dir"] = s.output_dir;
  return j.dump(2) + "\n";
}

bool operator==(const Scenario& a, const Scenario& b) {
  return serialize_scenario(a) == serialize_scenario(b);
}

}  // namespace fermidyn
