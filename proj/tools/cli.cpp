#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kron/clt.hpp"
#include "kron/ensemble.hpp"
#include "kron/errors.hpp"
#include "kron/flatness.hpp"
#include "kron/io.hpp"
#include "kron/mde.hpp"
#include "kron/parallel.hpp"
#include "kron/sampler.hpp"
#include "kron/self_energy.hpp"
#include "kron/stability.hpp"

#ifndef KRON_DYSON_VERSION
#define KRON_DYSON_VERSION "0.1.0"
#endif

namespace kron::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// --- configuration --------------------------------------------------------------
// Every subcommand declares its parameters with a default. The resolved value
// is: the command-line flag if given, else the config file entry, else the
// default.

struct Param {
  std::string key;
  CLI::Option* option = nullptr;
  std::function<json()> flag_value;
};

class Command {
 public:
  Command(CLI::App& app, std::string name, std::string help) : name_(std::move(name)) {
    sub_ = app.add_subcommand(name_, std::move(help));
    add_string("config", "", "JSON config file; flags override its values", false);
    add_string("ensemble", "", "ensemble JSON file (overrides preset)");
    add_string("preset", "semicircle", "built-in ensemble: semicircle | four_block | two_block");
    add_int("beta", 2, "symmetry class of the preset (1 real, 2 complex)");
    add_string("out", ".", "output directory");
    add_int("threads", 0, "worker count (0: KRON_DYSON_THREADS or the OpenMP default)");
  }

  CLI::App* app() { return sub_; }
  const std::string& name() const { return name_; }

  void add_string(const std::string& key, std::string def, const std::string& help, bool in_config = true) {
    auto v = std::make_shared<std::string>(def);
    add(key, json(def), sub_->add_option("--" + flag(key), *v, help), [v] { return json(*v); }, in_config);
  }
  void add_int(const std::string& key, long long def, const std::string& help) {
    auto v = std::make_shared<long long>(def);
    add(key, json(def), sub_->add_option("--" + flag(key), *v, help), [v] { return json(*v); });
  }
  void add_uint(const std::string& key, std::uint64_t def, const std::string& help) {
    auto v = std::make_shared<std::uint64_t>(def);
    add(key, json(def), sub_->add_option("--" + flag(key), *v, help), [v] { return json(*v); });
  }
  void add_double(const std::string& key, std::optional<double> def, const std::string& help) {
    auto v = std::make_shared<double>(def.value_or(0.0));
    add(key, def ? json(*def) : json(nullptr), sub_->add_option("--" + flag(key), *v, help),
        [v] { return json(*v); });
  }
  void add_bool(const std::string& key, bool def, const std::string& help) {
    auto v = std::make_shared<bool>(def);
    add(key, json(def), sub_->add_option("--" + flag(key), *v, help), [v] { return json(*v); });
  }
  void add_doubles(const std::string& key, std::vector<double> def, const std::string& help) {
    auto v = std::make_shared<std::vector<double>>(def);
    add(key, json(def), sub_->add_option("--" + flag(key), *v, help)->delimiter(','), [v] { return json(*v); });
  }
  void add_ints(const std::string& key, std::vector<int> def, const std::string& help) {
    auto v = std::make_shared<std::vector<int>>(def);
    add(key, json(def), sub_->add_option("--" + flag(key), *v, help)->delimiter(','), [v] { return json(*v); });
  }

  /// A key settable only from the config file (structured values).
  void add_config_only(const std::string& key, json def) { defaults_[key] = std::move(def); }

  /// Defaults, overlaid by the config file, overlaid by explicit flags.
  json resolve() const {
    json cfg = defaults_;
    const std::string path = params_.at(0).flag_value().get<std::string>();
    if (!path.empty()) {
      json file;
      try {
        file = json::parse(read_text(path));
      } catch (const json::parse_error& e) {
        throw InputError("malformed config '" + path + "': " + e.what());
      }
      if (!file.is_object()) throw InputError("config '" + path + "' must be a JSON object");
      if (file.contains("config") && file["config"].is_object()) file = file["config"];  // a manifest
      for (auto it = file.begin(); it != file.end(); ++it) {
        if (!cfg.contains(it.key())) throw InputError("config '" + path + "': unknown key '" + it.key() + "'");
        cfg[it.key()] = it.value();
      }
    }
    for (const auto& p : params_) {
      if (p.option->count() > 0 && p.key != "config") cfg[p.key] = p.flag_value();
    }
    return cfg;
  }

 private:
  static std::string flag(const std::string& key) {
    std::string f = key;
    for (auto& c : f)
      if (c == '_') c = '-';
    return f;
  }
  void add(const std::string& key, json def, CLI::Option* opt, std::function<json()> getter, bool in_config = true) {
    if (in_config) defaults_[key] = std::move(def);
    params_.push_back({key, opt, std::move(getter)});
  }

  std::string name_;
  CLI::App* sub_ = nullptr;
  json defaults_ = json::object();
  std::vector<Param> params_;
};

// --- typed access to the resolved config ---------------------------------------------

template <class T>
T get(const json& cfg, const std::string& key) {
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError("config value '" + key + "' has the wrong type: " + e.what());
  }
}

std::optional<double> get_optional(const json& cfg, const std::string& key) {
  if (!cfg.contains(key) || cfg.at(key).is_null()) return std::nullopt;
  return get<double>(cfg, key);
}

StructureEnsemble ensemble_from(const json& cfg) {
  const auto path = get<std::string>(cfg, "ensemble");
  if (!path.empty()) return load_ensemble(path);
  const auto preset = get<std::string>(cfg, "preset");
  const int beta = get<int>(cfg, "beta");
  if (beta != 1 && beta != 2) throw InputError("beta must be 1 or 2");
  if (preset == "semicircle") return presets::semicircle(beta);
  if (preset == "four_block") return presets::four_block(beta);
  if (preset == "two_block") return presets::two_block(beta);
  throw InputError("unknown preset '" + preset + "'");
}

std::string fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json complex_json(cplx v) { return json{{"re", v.real()}, {"im", v.imag()}}; }

json matrix_json(const Matrix& A) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back(complex_json(A(i, j)));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const json& v, int n, const std::string& what) {
  if (!v.is_array() || static_cast<int>(v.size()) != n) throw InputError(what + ": expected an n x n matrix");
  Matrix A(n, n);
  for (int i = 0; i < n; ++i) {
    if (!v[i].is_array() || static_cast<int>(v[i].size()) != n) throw InputError(what + ": expected an n x n matrix");
    for (int j = 0; j < n; ++j) {
      const json& e = v[i][j];
      if (e.is_number()) {
        A(i, j) = e.get<double>();
      } else if (e.is_object() && e.contains("re")) {
        A(i, j) = cplx(e["re"].get<double>(), e.value("im", 0.0));
      } else {
        throw InputError(what + ": entries must be numbers or {\"re\",\"im\"} objects");
      }
    }
  }
  return A;
}

/// Output directory plus manifest bookkeeping.
class Run {
 public:
  Run(const Command& cmd, json cfg)
      : command_(cmd.name()), cfg_(std::move(cfg)), start_(std::chrono::steady_clock::now()) {
    dir_ = get<std::string>(cfg_, "out");
    threads_ = resolve_worker_count(static_cast<int>(get<long long>(cfg_, "threads")));
    set_worker_count(threads_);
  }
  const json& cfg() const { return cfg_; }
  std::string path(const std::string& file) {
    fs::create_directories(dir_);
    outputs_.push_back(file);
    return (fs::path(dir_) / file).string();
  }
  void finish(const std::string& ensemble_hash) {
    json config = cfg_;
    config.erase("out");
    config.erase("threads");
    const std::string config_text = config.dump(2) + "\n";
    json manifest;
    manifest["command"] = command_;
    manifest["version"] = KRON_DYSON_VERSION;
    manifest["config"] = config;
    manifest["config_hash"] = fnv1a(config.dump());
    manifest["ensemble_hash"] = ensemble_hash;
    manifest["seed"] = config.contains("seed") ? config["seed"] : json(nullptr);
    manifest["threads"] = threads_;
    manifest["outputs"] = outputs_;
    manifest["rerun"] = "kron-dyson " + command_ + " --config " + (fs::path(dir_) / "manifest.json").string();
    manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    manifest["finished_at"] = stamp;
    fs::create_directories(dir_);
    write_text((fs::path(dir_) / "manifest.json").string(), manifest.dump(2) + "\n");
  }

 private:
  std::string command_;
  json cfg_;
  std::chrono::steady_clock::time_point start_;
  std::string dir_;
  int threads_ = 1;
  std::vector<std::string> outputs_;
};

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// --- subcommands ---------------------------------------------------------------------

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  const StructureEnsemble ens = load_ensemble(path);
  const auto violations = find_violations(ens);
  if (violations.empty()) {
    out << "valid: n=" << ens.n << " d=" << ens.d() << " beta=" << ens.beta
        << " entry_law=" << to_string(ens.entry_law) << " hash=" << ensemble_hash(ens) << "\n";
    return 0;
  }
  try {
    validate(ens);
  } catch (const ValidationError& e) {
    for (const auto& v : e.violations()) err << v.field << ": " << v.message << "\n";
    return static_cast<int>(e.kind());
  }
  return 0;
}

void cmd_flatness(Run& run) {
  const json& cfg = run.cfg();
  const StructureEnsemble ens = validate(ensemble_from(cfg));
  Pattern Z = support_pattern(ens);
  const auto pattern_path = get<std::string>(cfg, "pattern");
  if (!pattern_path.empty()) {
    json p;
    try {
      p = json::parse(read_text(pattern_path));
    } catch (const json::parse_error& e) {
      throw InputError("malformed pattern file: " + std::string(e.what()));
    }
    if (!p.is_array() || static_cast<int>(p.size()) != ens.n) throw InputError("pattern must be an n x n 0/1 array");
    for (int k = 0; k < ens.n; ++k)
      for (int l = 0; l < ens.n; ++l) Z(k, l) = p.at(k).at(l).get<int>() != 0 ? 1 : 0;
  }
  FlatnessOptions fo;
  fo.budget = get<int>(cfg, "budget");
  fo.seed = get<std::uint64_t>(cfg, "seed");
  const FlatnessReport r = estimate_flatness_constant(ens, Z, fo);
  json j;
  json z = json::array();
  for (int k = 0; k < ens.n; ++k) {
    json row = json::array();
    for (int l = 0; l < ens.n; ++l) row.push_back(r.Z(k, l));
    z.push_back(row);
  }
  j["Z"] = z;
  j["exponent"] = r.exponent ? json(*r.exponent) : json(nullptr);
  j["c_estimate"] = r.c_estimate;
  j["certified"] = r.certified;
  j["samples_used"] = r.samples_used;
  j["minima_trace"] = r.minima_trace;
  j["ensemble_hash"] = ensemble_hash(ens);
  write_json(run.path("flatness.json"), j);
  run.finish(ensemble_hash(ens));
}

void cmd_dos(Run& run) {
  const json& cfg = run.cfg();
  const StructureEnsemble ens = validate(ensemble_from(cfg));
  const double R = support_radius(ens);
  const double lo = get_optional(cfg, "lo").value_or(-R);
  const double hi = get_optional(cfg, "hi").value_or(R);
  const auto grid = uniform_grid(lo, hi, get<int>(cfg, "points"));
  DosOptions o;
  o.continuation.etas = geometric_etas(1e-1, get<double>(cfg, "eta_floor"), get<int>(cfg, "eta_count"));
  o.mass_tol = get<double>(cfg, "mass_tol");
  const DosCurve c = density_of_states(ens, grid, o);
  CsvTable t({"x", "rho", "residual", "eta_used"});
  for (std::size_t i = 0; i < grid.size(); ++i) t.add_row(std::vector<double>{grid[i], c.rho[i], c.residual[i], c.eta_used[i]});
  t.write(run.path("dos.csv"));
  std::size_t flagged = 0;
  for (bool f : c.flagged) flagged += f ? 1 : 0;
  json side;
  side["ensemble_hash"] = ensemble_hash(ens);
  side["options"] = {{"lo", lo}, {"hi", hi}, {"points", grid.size()}, {"eta_floor", c.eta_floor},
                     {"eta_count", o.continuation.etas.size()}, {"mass_tol", o.mass_tol}};
  side["mass"] = c.mass;
  side["flagged_points"] = flagged;
  write_json(run.path("dos.json"), side);
  run.finish(ensemble_hash(ens));
}

void cmd_mde_probe(Run& run) {
  const json& cfg = run.cfg();
  const StructureEnsemble ens = validate(ensemble_from(cfg));
  const auto re = get<std::vector<double>>(cfg, "re");
  const auto im = get<std::vector<double>>(cfg, "im");
  CsvTable t({"re_z", "im_z", "trace_M_re", "trace_M_im", "min_eig_im_M", "norm_M", "norm_M_inv", "residual",
              "iterations", "reflection_error"});
  double max_M = 0.0, max_Minv = 0.0;
  for (double y : im) {
    for (double x : re) {
      const cplx z(x, y);
      const MdePoint p = solve_mde_at(ens, z);
      const MdePoint q = solve_mde_at(ens, std::conj(z));
      const double nM = Eigen::JacobiSVD<Matrix>(p.M).singularValues()(0);
      const double nMi = Eigen::JacobiSVD<Matrix>(Matrix(p.M.inverse())).singularValues()(0);
      max_M = std::max(max_M, nM);
      max_Minv = std::max(max_Minv, nMi / (1.0 + std::abs(z)));
      const cplx tr = normalized_trace(p.M);
      t.add_row(std::vector<double>{x, y, tr.real(), tr.imag(), min_eigenvalue(hermitian_imag_part(p.M)), nM, nMi,
                                    p.residual, double(p.iterations), max_abs(q.M - p.M.adjoint())});
    }
  }
  t.write(run.path("mde_probe.csv"));
  json side;
  side["ensemble_hash"] = ensemble_hash(ens);
  side["max_norm_M"] = max_M;
  side["max_norm_M_inv_over_1_plus_abs_z"] = max_Minv;
  json asym = json::array();
  for (double r : {10.0, 100.0}) {
    const cplx z = cplx(0.0, r);
    const MdePoint p = solve_mde_at(ens, z);
    const Matrix dev = p.M + Matrix::Identity(ens.n, ens.n) / z;
    asym.push_back({{"abs_z", r}, {"abs_z_sq_times_deviation", r * r * Eigen::JacobiSVD<Matrix>(dev).singularValues()(0)}});
  }
  side["large_z_asymptotics"] = asym;
  write_json(run.path("mde_probe.json"), side);
  run.finish(ensemble_hash(ens));
}

void cmd_stability_probe(Run& run) {
  const json& cfg = run.cfg();
  const StructureEnsemble ens = validate(ensemble_from(cfg));
  const double scale = get<double>(cfg, "w_scale");
  const double threshold = get<double>(cfg, "bulk_threshold");
  json reports = json::array();
  for (double E0 : get<std::vector<double>>(cfg, "E0")) {
    const BoundaryValue b = continue_to_real_axis(ens, E0);
    const double rho = density_from(b.M);
    if (rho < threshold) throw DomainError("stability-probe: E0 = " + format_double(E0) + " is not in the bulk");
    const Matrix& M0 = b.M;
    const cplx w = scale * cplx(0.6, 0.8), xi = scale * cplx(0.8, -0.6);
    const PoleDecomposition pd = pole_decompose(ens, E0, M0, w, xi);
    const KernelCheck k = kernel_check(ens, M0);
    const Matrix Mp = mde_derivative(ens, M0);
    const TraceIdentity ti = trace_identity(ens, M0, Mp);
    const SaturatedSpectrum s = saturated_self_energy(ens, M0);
    const Matrix one_point = invert_one_point(ens, M0, Matrix::Identity(ens.n, ens.n));
    json r;
    r["E0"] = E0;
    r["rho"] = rho;
    r["lambda"] = complex_json(pd.lambda);
    r["lambda_model_error"] = std::abs(pd.lambda - pd.lambda_model);
    r["alpha"] = complex_json(pd.alpha);
    r["alpha_perturbative"] = complex_json(pd.alpha_perturbative);
    r["gap"] = s.gap;
    r["top_eigenvalue"] = s.top_eigenvalue;
    r["top_vector_cosine_im_U"] = s.cosine_with_im_U;
    r["kernel_residual"] = k.residual;
    r["kernel_singular_ratio"] = k.singular_values.size() > 1 ? k.singular_values(1) / k.singular_values(0) : 0.0;
    r["kernel_dim_check"] = k.singular_values.size() < 2 || k.singular_values(1) >= 1e3 * k.singular_values(0);
    r["phi_plus_minus"] = complex_json(ti.phi);
    r["ward_residual"] = ward_residual(ens, M0);
    r["derivative_identity_error"] = hs_norm(one_point - Mp);
    reports.push_back(r);
  }
  write_json(run.path("stability.json"), reports);
  run.finish(ensemble_hash(ens));
}

void cmd_locallaw(Run& run) {
  const json& cfg = run.cfg();
  const StructureEnsemble ens = validate(ensemble_from(cfg));
  const auto Ns = get<std::vector<int>>(cfg, "N");
  const double E0 = get<double>(cfg, "E0");
  const auto eta_exponent = get_optional(cfg, "eta_exponent");
  const double eta = get<double>(cfg, "eta");
  auto eta_of_N = [&](int N) { return eta_exponent ? std::pow(double(N), -*eta_exponent) : eta; };
  const LocalLawSweep sw = local_law_sweep(ens, Ns, E0, eta_of_N, get<int>(cfg, "samples"),
                                           get<std::uint64_t>(cfg, "seed"));
  CsvTable t({"N", "eta", "entrywise_median", "entrywise_q90", "averaged_median", "averaged_q90", "scale_entrywise",
              "scale_averaged"});
  CsvTable per({"N", "sample_index", "entrywise", "averaged"});
  for (const auto& r : sw.reports) {
    t.add_row(std::vector<double>{double(r.N), r.z.imag(), r.entrywise_median, r.entrywise_q90, r.averaged_median,
                                  r.averaged_q90, r.scale_entrywise, r.scale_averaged});
    for (std::size_t k = 0; k < r.entrywise.size(); ++k)
      per.add_row(std::vector<std::string>{std::to_string(r.N), std::to_string(k), format_double(r.entrywise[k]),
                                           format_double(r.averaged[k])});
  }
  t.write(run.path("locallaw.csv"));
  per.write(run.path("locallaw_samples.csv"));
  write_json(run.path("locallaw.json"), {{"ensemble_hash", ensemble_hash(ens)},
                                         {"entrywise_slope", sw.entrywise_slope},
                                         {"averaged_slope", sw.averaged_slope},
                                         {"entrywise_slope_theory", -0.5},
                                         {"averaged_slope_theory", -1.0}});
  run.finish(ensemble_hash(ens));
}

void cmd_twopoint(Run& run) {
  const json& cfg = run.cfg();
  const StructureEnsemble ens = validate(ensemble_from(cfg));
  const int N = get<int>(cfg, "N");
  const double E0 = get<double>(cfg, "E0");
  const double eta = get<double>(cfg, "eta");
  const auto variant_name = get<std::string>(cfg, "variant");
  const auto mode = get<std::string>(cfg, "mode");
  if (variant_name != "plain" && variant_name != "tilde") throw InputError("variant must be plain or tilde");
  if (mode != "opposite" && mode != "same") throw InputError("mode must be opposite or same");
  const bool tilde = variant_name == "tilde";
  if (tilde && mode == "same") throw InputError("the tilde variant is available in opposite mode only");
  const Matrix B = cfg.at("B").is_null() ? Matrix(Matrix::Identity(ens.n, ens.n)) : matrix_from_json(cfg.at("B"), ens.n, "B");
  const cplx z(E0, eta);
  const cplx zeta = mode == "opposite" ? cplx(E0, -eta) : cplx(E0, 2.0 * eta);
  const Matrix Mz = solve_mde_at(ens, z).M;
  const Matrix Mzeta = solve_mde_at(ens, zeta).M;
  Matrix target;
  if (mode == "opposite") {
    const Matrix M0 = continue_to_real_axis(ens, E0).M;
    target = deterministic_two_point_approx(M0, z, zeta, B, tilde ? TwoPointVariant::tilde : TwoPointVariant::plain);
  } else {
    target = invert_two_point(build_two_point(ens, z, Mz, zeta, Mzeta), B);
  }
  const int samples = get<int>(cfg, "samples");
  const auto seed = get<std::uint64_t>(cfg, "seed");
  std::vector<double> rel(static_cast<std::size_t>(samples)), resid(static_cast<std::size_t>(samples));
  std::vector<cplx> tr(static_cast<std::size_t>(samples));
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t k) {
    const Sample s = draw_sample(ens, N, seed, k);
    const HermitianSpectrum spec(s, true);
    const BlockMatrix Gz = spec.resolvent(z), Gzeta = spec.resolvent(zeta);
    const Matrix GB = tilde ? multiresolvent_tilde(Gz, Gzeta, B, s.beta) : multiresolvent_plain(Gz, Gzeta, B);
    rel[k] = hs_norm(GB - target) / hs_norm(target);
    resid[k] = tilde ? std::nan("") : self_consistency_residual(ens, GB, Mz, Mzeta, B);
    tr[k] = normalized_trace(GB);
  });
  CsvTable t({"sample_index", "trace_re", "trace_im", "relative_error", "self_consistency_residual"});
  double mean = 0.0;
  for (int k = 0; k < samples; ++k) {
    const auto i = static_cast<std::size_t>(k);
    t.add_row(std::vector<std::string>{std::to_string(k), format_double(tr[i].real()), format_double(tr[i].imag()),
                                       format_double(rel[i]), format_double(resid[i])});
    mean += rel[i] / samples;
  }
  t.write(run.path("twopoint.csv"));
  write_json(run.path("twopoint.json"), {{"ensemble_hash", ensemble_hash(ens)},
                                         {"target_trace", complex_json(normalized_trace(target))},
                                         {"mean_relative_error", mean}});
  run.finish(ensemble_hash(ens));
}

int cmd_clt(Run& run, std::ostream& out) {
  const json& cfg = run.cfg();
  const int samples = get<int>(cfg, "samples");
  if (samples == 0) {
    json echo = cfg;
    echo["dry_run"] = true;
    out << echo.dump(2) << "\n";
    return 0;
  }
  const StructureEnsemble ens = validate(ensemble_from(cfg));
  CltOptions o;
  o.require_bulk = get<bool>(cfg, "require_bulk");
  o.bulk_threshold = get<double>(cfg, "bulk_threshold");
  const CltReport r = run_clt_experiment(ens, test_function_from_tag(get<std::string>(cfg, "test_function")),
                                         get<double>(cfg, "E0"), get<double>(cfg, "gamma"), get<int>(cfg, "N"),
                                         samples, get<std::uint64_t>(cfg, "seed"), o);
  CsvTable t({"sample_index", "statistic", "seed_substream"});
  for (int k = 0; k < samples; ++k) {
    const auto i = static_cast<std::size_t>(k);
    t.add_row(std::vector<std::string>{std::to_string(k), format_double(r.statistics[i]),
                                       std::to_string(r.substream_seeds[i])});
  }
  t.write(run.path("clt_samples.csv"));
  json j;
  j["ensemble_hash"] = r.ensemble_hash;
  j["N"] = r.N;
  j["gamma"] = r.gamma;
  j["E0"] = r.E0;
  j["beta"] = r.beta;
  j["samples"] = r.samples;
  j["seed"] = r.seed;
  j["test_function"] = r.test_function;
  j["rho_E0"] = r.rho_E0;
  j["mean"] = r.mean;
  j["variance"] = r.variance;
  j["variance_se"] = r.variance_se;
  j["skewness"] = r.skewness;
  j["excess_kurtosis"] = r.excess_kurtosis;
  j["skewness_z"] = r.skewness_z;
  j["kurtosis_z"] = r.kurtosis_z;
  j["ks_distance"] = r.ks_distance;
  j["V_g"] = r.vg;
  j["variance_ratio"] = r.variance_ratio;
  j["variance_ratio_se"] = r.variance_ratio_se;
  write_json(run.path("clt.json"), j);
  run.finish(r.ensemble_hash);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Matrix Dyson equation solver and Kronecker random matrix experiments", "kron-dyson"};
  app.require_subcommand(1);
  app.set_version_flag("--version", KRON_DYSON_VERSION);

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "check an ensemble file");
  validate_cmd->add_option("path", validate_path, "ensemble JSON file")->required();

  std::vector<std::unique_ptr<Command>> commands;
  auto make = [&](const std::string& name, const std::string& help) -> Command& {
    commands.push_back(std::make_unique<Command>(app, name, help));
    return *commands.back();
  };

  Command& flatness = make("flatness", "support pattern, primitivity exponent and flatness constant estimate");
  flatness.add_int("budget", 200, "number of multistart restarts");
  flatness.add_uint("seed", 1, "master seed");
  flatness.add_string("pattern", "", "optional JSON file with a user-supplied 0/1 pattern");

  Command& dos = make("dos", "self-consistent density of states on a uniform grid");
  dos.add_int("points", 2000, "grid points");
  dos.add_double("lo", std::nullopt, "grid start (default: minus the support bound)");
  dos.add_double("hi", std::nullopt, "grid end (default: the support bound)");
  dos.add_double("eta_floor", 1e-6, "smallest eta of the continuation");
  dos.add_int("eta_count", 11, "number of eta values in the continuation");
  dos.add_double("mass_tol", 1e-2, "allowed deviation of the total mass from 1");

  Command& probe = make("mde-probe", "solver diagnostics on a grid of spectral parameters");
  probe.add_doubles("re", {-3.0, -1.5, 0.0, 1.5, 3.0}, "real parts");
  probe.add_doubles("im", {0.01, 0.1, 1.0, 10.0}, "imaginary parts (positive)");

  Command& stab = make("stability-probe", "stability operator diagnostics at bulk energies");
  stab.add_doubles("E0", {0.0}, "bulk energies");
  stab.add_double("w_scale", 1e-3, "modulus of the offsets w and xi");
  stab.add_double("bulk_threshold", 1e-3, "minimal density for a bulk energy");

  Command& ll = make("locallaw", "empirical local-law errors over a ladder of N");
  ll.add_ints("N", {128, 256, 512, 1024}, "matrix sizes");
  ll.add_double("E0", 0.0, "energy");
  ll.add_double("eta", 0.1, "fixed imaginary part");
  ll.add_double("eta_exponent", std::nullopt, "if set, eta = N^(-eta_exponent)");
  ll.add_int("samples", 20, "samples per N");
  ll.add_uint("seed", 1, "master seed");

  Command& tp = make("twopoint", "sampled two-resolvent averages against their deterministic predictions");
  tp.add_int("N", 512, "matrix size");
  tp.add_double("E0", 0.0, "energy");
  tp.add_double("eta", 0.05, "imaginary part of z");
  tp.add_string("variant", "plain", "plain | tilde");
  tp.add_string("mode", "opposite", "opposite (zeta = conj z) | same (zeta = E0 + 2 i eta)");
  tp.add_int("samples", 10, "samples");
  tp.add_uint("seed", 1, "master seed");
  tp.add_config_only("B", nullptr);  // n x n observable; identity when null

  Command& clt = make("clt", "Monte Carlo mesoscopic linear statistics");
  clt.add_int("N", 1024, "matrix size");
  clt.add_double("gamma", 0.2, "mesoscopic exponent in (0, 1)");
  clt.add_double("E0", 0.0, "energy");
  clt.add_int("samples", 400, "samples (0: dry run that echoes the configuration)");
  clt.add_uint("seed", 1, "master seed");
  clt.add_string("test_function", "bump3", "bump3 | gaussian_truncated");
  clt.add_bool("require_bulk", true, "refuse to run outside the bulk");
  clt.add_double("bulk_threshold", 1e-3, "minimal density for a bulk energy");

  std::vector<std::string> argv_store;
  argv_store.push_back("kron-dyson");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::input);
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(validate_path, out, err);
    for (auto& c : commands) {
      if (!c->app()->parsed()) continue;
      json cfg = c->resolve();
      Run run(*c, cfg);
      if (c->name() == "flatness") cmd_flatness(run);
      if (c->name() == "dos") cmd_dos(run);
      if (c->name() == "mde-probe") cmd_mde_probe(run);
      if (c->name() == "stability-probe") cmd_stability_probe(run);
      if (c->name() == "locallaw") cmd_locallaw(run);
      if (c->name() == "twopoint") cmd_twopoint(run);
      if (c->name() == "clt") return cmd_clt(run, out);
      out << c->name() << ": wrote outputs to " << get<std::string>(cfg, "out") << "\n";
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::input);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::input);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::numerical);
  }
  return 0;
}

}  // namespace kron::cli
