#include "selftest.hpp"

#include "sepstein/antisym.hpp"
#include "sepstein/serialize.hpp"
#include "sepstein/states.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace sepstein::cli {

namespace {

// Exit code contract: 0 success, 2 usage or parse trouble, 3 solver or
// numerical trouble, 4 a result contradicting its own certificate.
enum ExitCode { kOk = 0, kUsage = 2, kNumerical = 3, kInconsistent = 4 };

struct SpecError : public std::runtime_error {
  size_t offset;
  SpecError(size_t off, const std::string& msg)
      : std::runtime_error("byte " + std::to_string(off) + ": " + msg), offset(off) {}
};

struct KeyValues {
  std::optional<int> d;
  std::optional<double> p;
};

int parse_int_at(const std::string& text, size_t lo, size_t hi) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data() + lo, text.data() + hi, v);
  if (ec != std::errc() || ptr != text.data() + hi)
    throw SpecError(lo, "expected an integer");
  return v;
}

double parse_double_at(const std::string& text, size_t lo, size_t hi) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data() + lo, text.data() + hi, v);
  if (ec != std::errc() || ptr != text.data() + hi)
    throw SpecError(lo, "expected a number");
  return v;
}

KeyValues parse_key_values(const std::string& text, size_t base) {
  KeyValues kv;
  size_t pos = base;
  while (pos < text.size()) {
    size_t stop = text.find(',', pos);
    if (stop == std::string::npos) stop = text.size();
    size_t eq = text.find('=', pos);
    if (eq == std::string::npos || eq >= stop)
      throw SpecError(pos, "expected key=value");
    std::string key = text.substr(pos, eq - pos);
    if (key == "d") {
      if (kv.d) throw SpecError(pos, "duplicate key 'd'");
      kv.d = parse_int_at(text, eq + 1, stop);
    } else if (key == "p") {
      if (kv.p) throw SpecError(pos, "duplicate key 'p'");
      kv.p = parse_double_at(text, eq + 1, stop);
    } else {
      throw SpecError(pos, "unknown key '" + key + "'");
    }
    pos = stop + (stop < text.size() ? 1 : 0);
    if (stop < text.size() && stop + 1 == text.size())
      throw SpecError(text.size(), "trailing comma");
  }
  if (!kv.d) throw SpecError(text.size(), "missing key 'd'");
  return kv;
}

int require_dim(const KeyValues& kv, const std::string& text, size_t base, int cap_dim) {
  int d = *kv.d;
  size_t at = text.find("d=", base);
  size_t off = at == std::string::npos ? base : at + 2;
  if (d < 2) throw SpecError(off, "d must be at least 2");
  if (static_cast<long>(d) * d > cap_dim)
    throw SpecError(off, "total dimension d^2 exceeds the cap of " + std::to_string(cap_dim));
  return d;
}

double require_prob(const KeyValues& kv, const std::string& text, size_t base) {
  if (!kv.p) throw SpecError(text.size(), "missing key 'p'");
  if (*kv.p < 0.0 || *kv.p > 1.0) {
    size_t at = text.find("p=", base);
    throw SpecError(at == std::string::npos ? base : at + 2, "p must lie in [0,1]");
  }
  return *kv.p;
}

// Grammar: maxent:d=<n> | isotropic:d=<n>,p=<x> | werner:d=<n>,p=<x>
//          | antisym:d=<n> | file:<path>. Errors carry the byte offset.
BipartiteState parse_state_spec(const std::string& text, int cap_dim) {
  size_t colon = text.find(':');
  if (colon == std::string::npos)
    throw SpecError(0, "expected '<kind>:<args>'");
  std::string kind = text.substr(0, colon);
  size_t base = colon + 1;

  if (kind == "file") {
    std::string path = text.substr(base);
    if (path.empty()) throw SpecError(base, "missing file path");
    std::ifstream in(path);
    if (!in) throw SpecError(base, "cannot open '" + path + "'");
    json j;
    try {
      in >> j;
      BipartiteState st = state_from_json(j);
      if (st.dim() > cap_dim)
        throw SpecError(base, "state dimension exceeds the cap of " + std::to_string(cap_dim));
      return st;
    } catch (const SpecError&) {
      throw;
    } catch (const std::exception& e) {
      throw SpecError(base, std::string("invalid state file: ") + e.what());
    }
  }

  KeyValues kv = parse_key_values(text, base);
  if (kind == "maxent") {
    int d = require_dim(kv, text, base, cap_dim);
    if (kv.p) throw SpecError(base, "'maxent' takes no p");
    return BipartiteState(max_entangled(d), d, d);
  }
  if (kind == "antisym") {
    int d = require_dim(kv, text, base, cap_dim);
    if (kv.p) throw SpecError(base, "'antisym' takes no p");
    return BipartiteState(antisym_state(d), d, d);
  }
  if (kind == "isotropic") {
    int d = require_dim(kv, text, base, cap_dim);
    return BipartiteState(isotropic(d, require_prob(kv, text, base)), d, d);
  }
  if (kind == "werner") {
    int d = require_dim(kv, text, base, cap_dim);
    return BipartiteState(werner(d, require_prob(kv, text, base)), d, d);
  }
  throw SpecError(0, "unknown state kind '" + kind + "'");
}

struct RunConfig {
  std::string model = "ppt";
  double eps = 0.0;
  double delta = 0.0;
  std::string format = "json";
  int jobs = 1;
  std::uint64_t seed = 20270423;
  int cap_dim = kDimCap;
  std::string meas_class = "sep";
  std::string ball = "trace";
};

void add_common(CLI::App* cmd, RunConfig& cfg, bool with_eps_delta = true) {
  cmd->add_option("--model", cfg.model, "separable-cone model: ppt | dps:k | werner | isotropic")
      ->envname("SEPSTEIN_MODEL");
  if (with_eps_delta) {
    cmd->add_option("--eps", cfg.eps, "error / smoothing parameter")->envname("SEPSTEIN_EPS");
    cmd->add_option("--delta", cfg.delta, "deviation budget")->envname("SEPSTEIN_DELTA");
  }
  cmd->add_option("--format", cfg.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->envname("SEPSTEIN_FORMAT");
  cmd->add_option("--jobs", cfg.jobs, "parallel workers for independent rows")
      ->check(CLI::PositiveNumber)
      ->envname("SEPSTEIN_JOBS");
  cmd->add_option("--seed", cfg.seed, "seed for randomized suites")->envname("SEPSTEIN_SEED");
  cmd->add_option("--cap-dim", cfg.cap_dim, "refuse states larger than this total dimension")
      ->check(CLI::Range(2, kDimCap))
      ->envname("SEPSTEIN_CAP_DIM");
}

MeasClass parse_meas_class(const std::string& s, const SeparabilityModel& model) {
  if (s == "all") return MeasClass::all();
  if (s == "ppt") return MeasClass::ppt();
  if (s == "sep") return MeasClass::sep(model);
  throw std::invalid_argument("unknown measurement class '" + s + "' (all | ppt | sep)");
}

MeasureResult run_measure(const std::string& name, const BipartiteState& state,
                          const RunConfig& cfg) {
  SeparabilityModel model = SeparabilityModel::parse(cfg.model);
  if (name == "robustness") return gen_robustness_result(state, model);
  if (name == "dmax") return dmax_ent(state, model);
  if (name == "dmax-smoothed") {
    SmoothBall ball = cfg.ball == "purified" ? SmoothBall::purified(cfg.eps)
                                             : SmoothBall::trace(cfg.eps);
    return dmax_ent_smoothed(state, model, ball);
  }
  if (name == "ekappa") return e_kappa(state);
  if (name == "ekappa-tilde") return e_kappa_tilde(state, model);
  if (name == "dh")
    return dh_ent(state, cfg.eps, parse_meas_class(cfg.meas_class, model), model);
  if (name == "ree-lower") return ree_lower_ppt(state);
  throw std::invalid_argument("unknown measure '" + name +
                              "' (robustness | dmax | dmax-smoothed | ekappa | ekappa-tilde | "
                              "dh | ree-lower)");
}

void emit_measure(const MeasureResult& m, const std::string& format) {
  if (format == "csv") {
    std::cout << "measure,value_bits,capped,model,direction,gap,iterations\n";
    std::ostringstream os;
    os.precision(17);
    os << m.measure << ',' << m.value_bits << ',' << (m.capped ? "true" : "false") << ','
       << m.model << ',' << m.direction << ',' << m.gap << ',' << m.iterations;
    std::cout << os.str() << '\n';
  } else {
    std::cout << m.to_json().dump(2) << '\n';
  }
}

void emit_bound(const ProtocolBound& b, const std::string& format) {
  if (format == "csv") {
    std::cout << "lower_bits,upper_bits,eps,delta,model\n" << b.csv_row() << '\n';
  } else {
    std::cout << b.to_json().dump(2) << '\n';
  }
}

AntisymTable run_antisym_table(int d_min, int d_max, int jobs) {
  if (jobs <= 1 || d_max <= d_min) return antisym_table(d_min, d_max);

  std::vector<int> ds;
  for (int d = d_min; d <= d_max; ++d) ds.push_back(d);
  std::vector<AntisymTable> parts(ds.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < ds.size(); i = next.fetch_add(1))
      parts[i] = antisym_table(ds[i], ds[i]);
  };
  std::vector<std::thread> pool;
  int count = std::min<int>(jobs, int(ds.size()));
  pool.reserve(count);
  for (int k = 0; k < count; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  AntisymTable merged;
  for (const AntisymTable& p : parts) {
    for (const AntisymRow& row : p.rows) merged.rows.push_back(row);
    if (!p.complete && merged.complete) {
      merged.complete = false;
      merged.error = p.error;
    }
  }
  return merged;
}

void emit_antisym(const AntisymTable& table, const std::string& format) {
  if (format == "csv") {
    std::cout << AntisymRow::csv_header() << '\n';
    for (const AntisymRow& row : table.rows) std::cout << row.csv_row() << '\n';
  } else {
    nlohmann::json rows = nlohmann::json::array();
    for (const AntisymRow& row : table.rows) rows.push_back(row.to_json());
    nlohmann::json j{{"rows", rows}, {"complete", table.complete}};
    if (!table.complete) j["error"] = table.error;
    std::cout << j.dump(2) << '\n';
  }
}

int dispatch(int argc, char** argv) {
  CLI::App app{"One-shot entanglement manipulation bounds under separability-preserving "
               "operations: robustness and divergence measures, distillation/dilution "
               "bounds, and the antisymmetric-state gap table."};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string spec, measure_name;
  int d_min = 2, d_max = 20;
  std::string level = "full";

  CLI::App* measure = app.add_subcommand("measure", "evaluate one entanglement measure");
  measure->add_option("spec", spec, "state spec, e.g. maxent:d=2 or file:state.json")
      ->required();
  measure->add_option("name", measure_name, "measure name")->required();
  add_common(measure, cfg);
  measure->add_option("--class", cfg.meas_class, "measurement class for dh: all | ppt | sep")
      ->envname("SEPSTEIN_CLASS");
  measure->add_option("--ball", cfg.ball, "smoothing ball for dmax-smoothed: trace | purified")
      ->check(CLI::IsMember({"trace", "purified"}))
      ->envname("SEPSTEIN_BALL");

  CLI::App* distill =
      app.add_subcommand("distill-bounds", "two-sided one-shot distillation bounds");
  distill->add_option("spec", spec, "state spec")->required();
  add_common(distill, cfg);

  CLI::App* dilute = app.add_subcommand("dilute-bounds", "two-sided one-shot dilution bounds");
  dilute->add_option("spec", spec, "state spec")->required();
  add_common(dilute, cfg);

  CLI::App* table =
      app.add_subcommand("antisym-table", "antisymmetric-state bound table over a d range");
  table->add_option("--d-min", d_min, "smallest local dimension")->envname("SEPSTEIN_D_MIN");
  table->add_option("--d-max", d_max, "largest local dimension")->envname("SEPSTEIN_D_MAX");
  add_common(table, cfg, false);

  CLI::App* selftest = app.add_subcommand("selftest", "run every library invariant suite");
  selftest->add_option("--seed", cfg.seed, "suite seed")->envname("SEPSTEIN_SEED");
  selftest->add_option("--level", level, "full | quick")
      ->check(CLI::IsMember({"full", "quick"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (measure->parsed()) {
    BipartiteState state = parse_state_spec(spec, cfg.cap_dim);
    emit_measure(run_measure(measure_name, state, cfg), cfg.format);
    return kOk;
  }
  if (distill->parsed()) {
    BipartiteState state = parse_state_spec(spec, cfg.cap_dim);
    emit_bound(distill_bounds(state, cfg.eps, cfg.delta, SeparabilityModel::parse(cfg.model)),
               cfg.format);
    return kOk;
  }
  if (dilute->parsed()) {
    BipartiteState state = parse_state_spec(spec, cfg.cap_dim);
    emit_bound(cost_bounds(state, cfg.eps, cfg.delta, SeparabilityModel::parse(cfg.model)),
               cfg.format);
    return kOk;
  }
  if (table->parsed()) {
    AntisymTable result = run_antisym_table(d_min, d_max, cfg.jobs);
    emit_antisym(result, cfg.format);
    if (!result.complete) {
      std::cerr << "antisym-table: " << result.error << '\n';
      return kNumerical;
    }
    return kOk;
  }
  if (selftest->parsed()) {
    std::cerr << "selftest: seed " << cfg.seed << ", level " << level << '\n';
    bool pass = false;
    nlohmann::json summary = run_selftest(cfg.seed, level, &pass);
    std::cout << summary.dump(2) << '\n';
    if (!pass) {
      std::cerr << "selftest: FAILED\n";
      return kInconsistent;
    }
    std::cerr << "selftest: all suites passed\n";
    return kOk;
  }
  return kUsage;
}

}  // namespace

}  // namespace sepstein::cli

int main(int argc, char** argv) {
  using namespace sepstein::cli;
  try {
    return dispatch(argc, argv);
  } catch (const SpecError& e) {
    std::cerr << "spec parse error at " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const sepstein::ConsistencyError& e) {
    std::cerr << "consistency error: " << e.what() << '\n';
    return kInconsistent;
  } catch (const sepstein::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
}
