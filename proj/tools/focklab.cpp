#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "focklab/counterexample.hpp"
#include "focklab/heat.hpp"
#include "focklab/io.hpp"
#include "focklab/irreversibility.hpp"
#include "focklab/kernel_tests.hpp"
#include "focklab/spectrum.hpp"

using namespace focklab;

namespace {

enum Exit { kOk = 0, kGeneric = 1, kValidation = 2, kNumeric = 3, kVerdict = 4 };

struct Global {
  double tol = 1e-10;
  unsigned threads = 0;
  std::string out;
  std::string format = "json";
};

// Writes the artifact (stdout when --out is empty). JSON artifacts embed the
// deterministic manifest; a timestamped sidecar accompanies every file.
void emit(const Global& G, RunManifest m, ojson body, const std::optional<CsvTable>& csv) {
  std::string text;
  if (G.format == "csv") {
    if (!csv) throw ValidationError("--format csv is not available for '" + m.command + "'");
    text = csv->str();
  } else {
    ojson doc;
    doc["manifest"] = m.deterministic_json();
    for (auto it = body.begin(); it != body.end(); ++it) doc[it.key()] = it.value();
    text = dump_json(doc);
  }
  m.finished_utc = utc_now();
  if (G.out.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  write_text_file(G.out, text);
  ojson side = m.full_json();
  side["artifact"] = G.out;
  side["format"] = G.format;
  write_text_file(G.out + ".manifest.json", dump_json(side));
}

ojson base_config(const Global& G, const std::string& command) {
  ojson c;
  c["command"] = command;
  c["tol"] = G.tol;
  c["format"] = G.format;
  return c;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto comma = s.find(',', pos);
    const std::string tok = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ValidationError("cannot parse number '" + tok + "' in list '" + s + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical toolkit for radial Toeplitz operators on the Fock space"};
  app.set_version_flag("--version", std::string(FOCKLAB_VERSION));
  app.require_subcommand(1);
  app.fallthrough();

  Global G;
  app.add_option("--tol", G.tol, "Absolute/relative quadrature tolerance")->check(CLI::PositiveNumber);
  app.add_option("--threads", G.threads, "Worker threads (0: FOCKLAB_THREADS or hardware)");
  app.add_option("--out", G.out, "Output path (default stdout)");
  app.add_option("--format", G.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  // symbol-validate
  auto* sv = app.add_subcommand("symbol-validate", "Parse and validate a symbol spec; report its norms");
  std::string sv_spec;
  sv->add_option("spec", sv_spec, "Symbol spec (JSON file)")->required();

  // heat
  auto* ht = app.add_subcommand("heat", "Heat transform g^(t)(x) on a grid with the uniform bound");
  std::string ht_spec, ht_xs;
  double ht_t = 0.25, ht_rmax = 10.0;
  int ht_points = 50;
  ht->add_option("spec", ht_spec, "Symbol spec (JSON file)")->required();
  ht->add_option("--t", ht_t, "Heat time")->check(CLI::PositiveNumber);
  ht->add_option("--x", ht_xs, "Comma-separated radii (overrides the grid)");
  ht->add_option("--r-max", ht_rmax, "Grid radius")->check(CLI::PositiveNumber);
  ht->add_option("--points", ht_points, "Linear grid points")->check(CLI::PositiveNumber);

  // kernel-scan
  auto* ks = app.add_subcommand("kernel-scan", "Gaussian-average scan over centers a_n = sqrt(n)");
  std::string ks_spec, ks_order = "quadratic", ks_centers;
  int ks_lo = 20, ks_hi = 200;
  ks->add_option("spec", ks_spec, "Symbol spec (JSON file)")->required();
  ks->add_option("--order", ks_order, "linear or quadratic")->check(CLI::IsMember({"linear", "quadratic"}));
  ks->add_option("--n-lo", ks_lo, "First n")->check(CLI::NonNegativeNumber);
  ks->add_option("--n-hi", ks_hi, "Last n")->check(CLI::NonNegativeNumber);
  ks->add_option("--centers", ks_centers, "Comma-separated sorted centers (overrides --n-lo/--n-hi)");

  // spectrum
  auto* sp = app.add_subcommand("spectrum", "Toeplitz eigenvalues lambda_m and boundedness verdict");
  std::string sp_spec, sp_mode = "form";
  int sp_mmax = 2000;
  sp->add_option("spec", sp_spec, "Symbol spec (JSON file)")->required();
  sp->add_option("--m-max", sp_mmax, "Largest index")->check(CLI::NonNegativeNumber);
  sp->add_option("--mode", sp_mode, "form (T_g) or natural (U_g)")->check(CLI::IsMember({"form", "natural"}));

  // powers
  auto* pw = app.add_subcommand("powers", "Heat/T/U verdicts for |z|^alpha");
  std::string pw_alphas = "-2.5,-1.9,-1.5,-1,-0.5,0,0.5";
  int pw_mmax = 400;
  pw->add_option("--alphas", pw_alphas, "Comma-separated exponents");
  pw->add_option("--m-max", pw_mmax, "Largest spectral index")->check(CLI::NonNegativeNumber);

  // annuli-suite
  auto* an = app.add_subcommand("annuli-suite", "Full counterexample suite for the annuli symbol");
  std::string an_spec, an_probes = "50,100,150,200";
  AnnuliConfig an_cfg;
  an->add_option("spec", an_spec, "Annuli spec (JSON file); flags below apply when omitted");
  an->add_option("--n-max", an_cfg.n_max, "Reporting horizon")->check(CLI::PositiveNumber);
  an->add_option("--c", an_cfg.c, "Width constant in (0, 1e-3]");
  an->add_flag("--smooth", an_cfg.smooth, "Smooth bump profiles");
  an->add_flag("--truncated", an_cfg.truncated, "Drop annuli beyond n_max");
  an->add_option("--probes", an_probes, "Comma-separated probe indices");

  // irreversibility
  auto* ir = app.add_subcommand("irreversibility", "Bump construction: bounded at t0, unbounded at t1");
  TimePair ir_times;
  int ir_bumps = 5;
  double ir_scale = 20.0;
  ir->add_option("--t0", ir_times.t0, "Later time")->check(CLI::PositiveNumber);
  ir->add_option("--t1", ir_times.t1, "Earlier time")->check(CLI::PositiveNumber);
  ir->add_option("--bumps", ir_bumps, "Number of bumps")->check(CLI::NonNegativeNumber);
  ir->add_option("--xi-scale", ir_scale, "|xi_n|^2 = scale * n")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  try {
    const unsigned threads = resolve_threads(G.threads);

    if (*sv) {
      const auto spec = load_symbol_spec(sv_spec);
      const auto g = as_symbol(spec);
      auto cfg = base_config(G, "symbol-validate");
      cfg["spec"] = to_json(spec);
      ojson body;
      body["kind"] = std::holds_alternative<AnnuliConfig>(spec) ? "AnnuliConfig" : "RadialSymbol";
      body["spec"] = to_json(spec);
      ojson l1;
      try {
        const auto m = l1_norm_area(g);
        l1["finite"] = true;
        l1["partial"] = m.partial;
        l1["tail_bound"] = m.tail_bound;
      } catch (const DivergentError& e) {
        l1["finite"] = false;
        l1["reason"] = e.what();
      }
      body["l1_norm"] = l1;
      const auto l2 = l2_norm_area_verdict(g);
      ojson l2j;
      l2j["finite"] = l2.finite;
      l2j["value"] = l2.value;
      l2j["certificate"] = l2.certificate;
      body["l2_norm"] = l2j;
      emit(G, make_manifest("symbol-validate", cfg, G.tol), body, std::nullopt);
      return kOk;
    }

    if (*ht) {
      const auto spec = load_symbol_spec(ht_spec);
      const auto g = as_symbol(spec);
      HeatParams{ht_t}.validate();
      const auto grid = ht_xs.empty() ? heat_sup_grid(ht_rmax, ht_points, 10) : parse_list(ht_xs);
      double bound = kInf;
      try {
        bound = heat_sup_bound(g, ht_t);
      } catch (const DivergentError&) {
      }
      const auto rs = parallel_map(grid, [&](double x) { return heat_transform_detail(g, ht_t, x, G.tol); }, threads);
      CsvTable csv({"x", "value", "tail_bound", "bound"});
      ojson rows = ojson::array();
      bool within = true;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (rs[i].divergent())
          throw DivergentError("heat transform diverges at x = " + std::to_string(grid[i]));
        within = within && rs[i].value <= bound * (1.0 + 1e-9);
        csv.add_row({csv_number(grid[i]), csv_number(rs[i].value), csv_number(rs[i].tail_bound), csv_number(bound)});
        ojson r;
        r["x"] = grid[i];
        r["value"] = rs[i].value;
        r["tail_bound"] = rs[i].tail_bound;
        rows.push_back(r);
      }
      auto cfg = base_config(G, "heat");
      cfg["spec"] = to_json(spec);
      cfg["t"] = ht_t;
      cfg["grid"] = grid;
      ojson body;
      body["t"] = ht_t;
      body["sup_bound"] = bound;
      body["within_bound"] = within;
      body["values"] = rows;
      emit(G, make_manifest("heat", cfg, G.tol), body, csv);
      return kOk;
    }

    if (*ks) {
      const auto spec = load_symbol_spec(ks_spec);
      const auto g = as_symbol(spec);
      if (ks_centers.empty() && ks_lo > ks_hi) throw ValidationError("kernel-scan: --n-lo exceeds --n-hi");
      const auto centers = ks_centers.empty() ? annuli_centers(ks_lo, ks_hi) : parse_list(ks_centers);
      const auto order = ks_order == "linear" ? KernelOrder::Linear : KernelOrder::Quadratic;
      const auto scan = supremal_scan(g, order, centers, G.tol, threads);
      auto cfg = base_config(G, "kernel-scan");
      cfg["spec"] = to_json(spec);
      cfg["order"] = ks_order;
      cfg["centers"] = centers;
      emit(G, make_manifest("kernel-scan", cfg, G.tol), to_json(scan), to_csv(scan));
      return kOk;
    }

    if (*sp) {
      const auto spec = load_symbol_spec(sp_spec);
      const auto g = as_symbol(spec);
      const auto mode = sp_mode == "form" ? SpectrumMode::Form : SpectrumMode::NaturalDomain;
      const auto prof = spectrum_profile(g, sp_mmax, mode, G.tol, threads);
      auto cfg = base_config(G, "spectrum");
      cfg["spec"] = to_json(spec);
      cfg["m_max"] = sp_mmax;
      cfg["mode"] = sp_mode;
      emit(G, make_manifest("spectrum", cfg, G.tol), to_json(prof), to_csv(prof));
      return kOk;
    }

    if (*pw) {
      const auto alphas = parse_list(pw_alphas);
      const auto table = power_symbol_table(alphas, pw_mmax, G.tol, threads);
      auto cfg = base_config(G, "powers");
      cfg["alphas"] = alphas;
      cfg["m_max"] = pw_mmax;
      ojson body;
      body["table"] = to_json(table);
      emit(G, make_manifest("powers", cfg, G.tol), body, to_csv(table));
      return kOk;
    }

    if (*an) {
      AnnuliConfig cfg_a = an_cfg;
      if (!an_spec.empty()) {
        const auto spec = load_symbol_spec(an_spec);
        if (!std::holds_alternative<AnnuliConfig>(spec))
          throw ValidationError(an_spec + ": annuli-suite needs a spec with a single annuli piece");
        cfg_a = std::get<AnnuliConfig>(spec);
      }
      cfg_a.validate();
      std::vector<int> probes;
      for (double p : parse_list(an_probes)) {
        if (p != std::floor(p)) throw ValidationError("--probes: indices must be integers");
        probes.push_back(static_cast<int>(p));
      }
      SuiteOptions opt;
      opt.tol = G.tol;
      opt.threads = threads;
      const auto R = run_counterexample_suite(cfg_a, probes, opt);
      auto cfg = base_config(G, "annuli-suite");
      cfg["config"] = to_json(cfg_a);
      cfg["probes"] = probes;
      emit(G, make_manifest("annuli-suite", cfg, G.tol), to_json(R), std::nullopt);
      return R.passed ? kOk : kVerdict;
    }

    if (*ir) {
      ir_times.validate();
      if (ir_bumps < 1) throw ValidationError("--bumps must be at least 1");
      const auto fam = greedy_centers(ir_times, default_frequencies(ir_bumps, ir_scale));
      const auto cons = verify_constraints(fam);
      const auto R = verify_irreversibility(fam, default_irreversibility_grid(fam), threads);
      auto cfg = base_config(G, "irreversibility");
      cfg["t0"] = ir_times.t0;
      cfg["t1"] = ir_times.t1;
      cfg["bumps"] = ir_bumps;
      cfg["xi_scale"] = ir_scale;
      const auto body = to_json(fam, cons, R);
      emit(G, make_manifest("irreversibility", cfg, G.tol), body, std::nullopt);
      return body["passed"].get<bool>() ? kOk : kVerdict;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kValidation;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const DivergentError& e) {
    std::cerr << "divergent: " << e.what() << "\n";
    return kNumeric;
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const PlacementFailure& e) {
    std::cerr << "placement failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kGeneric;
  }
  return kOk;
}
