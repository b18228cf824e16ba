#include "lrpe/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace lrpe::cli {

namespace {

const std::vector<std::size_t> kDefaultLinearSizes = {1024, 2048, 4096, 8192, 16384};
const std::vector<std::size_t> kDefaultVanillaSizes = {256, 512, 1024, 2048, 4096};

std::string format_double(double x, const char* fmt = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, x);
  return buf;
}

std::string_view subcommand_name(Subcommand sub) {
  switch (sub) {
    case Subcommand::kCheck: return "check";
    case Subcommand::kBench: return "bench";
    case Subcommand::kDump: return "dump";
  }
  return "?";
}

std::string join_sizes(const std::vector<std::size_t>& sizes) {
  std::string out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(sizes[i]);
  }
  return out;
}

// Writes to --out when given, otherwise to `out`. Returns false if the file
// could not be written.
bool emit(const CliConfig& cfg, const std::string& payload, std::ostream& out,
          std::ostream& err) {
  if (cfg.out.empty()) {
    out << payload;
    return true;
  }
  std::ofstream file(cfg.out, std::ios::binary | std::ios::trunc);
  if (!file) {
    err << "error: cannot open '" << cfg.out << "' for writing\n";
    return false;
  }
  file << payload;
  file.flush();
  if (!file) {
    err << "error: write to '" << cfg.out << "' failed\n";
    return false;
  }
  return true;
}

verify::PropertyReport guarded(const std::string& name,
                               const std::function<verify::PropertyReport()>& check) {
  try {
    return check();
  } catch (const std::exception& e) {
    auto report = verify::make_report(name + " (" + e.what() + ")",
                                      std::numeric_limits<double>::quiet_NaN(), 0.0, 0);
    return report;
  }
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    fields.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) return fields;
    start = pos + 1;
  }
}

std::size_t to_size(const std::string& text) {
  std::size_t used = 0;
  const unsigned long long v = std::stoull(text, &used);
  if (used != text.size()) throw std::invalid_argument("bad integer '" + text + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace

CliConfig parse_args(const std::vector<std::string>& args) {
  CliConfig cfg;
  CLI::App app{"Linearized relative positional encoding toolkit", "lrpe"};
  app.require_subcommand(1);

  std::string format = "csv";
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--spec", cfg.spec, "<lambda>:<p>:<theta_kind>:<d>[:q=..][:l=..][:seed=..]");
    sub->add_option("--n", cfg.n, "sequence length")->check(CLI::PositiveNumber);
    sub->add_option("--d", cfg.d, "override the spec dimension")->check(CLI::PositiveNumber);
    sub->add_option("--trials", cfg.trials, "timed trials per size")->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "seed used when the spec has none");
    sub->add_flag("--causal", cfg.causal, "causal attention path");
    sub->add_option("--out", cfg.out, "output path (default stdout)");
    sub->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--sizes", cfg.sizes, "linear-path sizes")->delimiter(',');
    sub->add_option("--vanilla-sizes", cfg.vanilla_sizes, "softmax-path sizes")->delimiter(',');
  };
  CLI::App* check = app.add_subcommand("check", "run the property suite");
  CLI::App* bench = app.add_subcommand("bench", "time linear vs softmax attention");
  CLI::App* dump = app.add_subcommand("dump", "write dense W_s matrices");
  for (CLI::App* sub : {check, bench, dump}) add_common(sub);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  if (check->parsed()) cfg.subcommand = Subcommand::kCheck;
  if (bench->parsed()) cfg.subcommand = Subcommand::kBench;
  if (dump->parsed()) cfg.subcommand = Subcommand::kDump;
  cfg.format = format == "json" ? Format::kJson : Format::kCsv;
  if (cfg.spec.empty() && cfg.subcommand != Subcommand::kBench) {
    throw UsageError(std::string(subcommand_name(cfg.subcommand)) + ": --spec is required");
  }
  return cfg;
}

std::vector<std::string> render_args(const CliConfig& cfg) {
  std::vector<std::string> args{std::string(subcommand_name(cfg.subcommand))};
  if (!cfg.spec.empty()) args.insert(args.end(), {"--spec", cfg.spec});
  args.insert(args.end(), {"--n", std::to_string(cfg.n)});
  if (cfg.d) args.insert(args.end(), {"--d", std::to_string(*cfg.d)});
  args.insert(args.end(), {"--trials", std::to_string(cfg.trials)});
  args.insert(args.end(), {"--seed", std::to_string(cfg.seed)});
  if (cfg.causal) args.emplace_back("--causal");
  if (!cfg.out.empty()) args.insert(args.end(), {"--out", cfg.out});
  args.insert(args.end(), {"--format", cfg.format == Format::kJson ? "json" : "csv"});
  if (!cfg.sizes.empty()) args.insert(args.end(), {"--sizes", join_sizes(cfg.sizes)});
  if (!cfg.vanilla_sizes.empty()) {
    args.insert(args.end(), {"--vanilla-sizes", join_sizes(cfg.vanilla_sizes)});
  }
  return args;
}

EncodingSpec effective_spec(const CliConfig& cfg) {
  EncodingSpec spec = parse_spec(cfg.spec.empty() ? kDefaultBenchSpec : std::string_view(cfg.spec));
  if (cfg.d) spec.d = *cfg.d;
  if (!spec.seed) spec.seed = cfg.seed;
  validate(spec);
  return spec;
}

std::vector<verify::PropertyReport> check_suite(const EncodingSpec& spec, std::size_t n,
                                                std::uint64_t seed) {
  using namespace verify;
  const PositionTransform transform(spec);
  const std::string tag = render_spec(spec);
  std::vector<PropertyReport> reports;

  reports.push_back(guarded("unitarity[" + tag + "]",
                            [&] { return check_unitarity(transform, 64); }));
  reports.push_back(guarded("decomposability[" + tag + "]",
                            [&] { return check_decomposability(transform, 32); }));
  reports.push_back(guarded("anchor_independence[" + tag + "]",
                            [&] { return check_anchor_independence(transform, 16, 16); }));
  reports.push_back(guarded("conjugation_insensitivity[" + tag + "]", [&] {
    return check_conjugation_insensitivity(transform, std::min<std::size_t>(n, 32), seed);
  }));
  if (spec.lambda == LambdaFamily::kPermutation) {
    reports.push_back(guarded("permutation_power_law[" + tag + "]",
                              [&] { return check_permutation_power_law(transform); }));
    reports.push_back(guarded("permutation_orthogonality[" + tag + "]",
                              [&] { return check_permutation_orthogonality(transform); }));
  }
  for (auto method : {CanonicalMethod::kAdditive, CanonicalMethod::kRope,
                      CanonicalMethod::kDeberta, CanonicalMethod::kRpr,
                      CanonicalMethod::kCosformer}) {
    reports.push_back(guarded("canonical[" + std::string(to_string(method)) + "]", [&] {
      return check_canonical(method, spec.d, 100, seed,
                             method == CanonicalMethod::kRope ? &transform : nullptr);
    }));
  }
  for (bool causal : {false, true}) {
    const std::string prefix = causal ? "causal_" : "";
    reports.push_back(guarded(prefix + "linear_vs_oracle[" + tag + "]", [&] {
      return check_linear_vs_oracle(transform, n, causal, seed);
    }));
    reports.push_back(guarded(prefix + "linear_vs_quadratic[" + tag + "]", [&] {
      return check_linear_vs_quadratic(transform, n, causal, seed);
    }));
  }
  if (spec.has_theta() && !transform.theta().empty()) {
    reports.push_back(guarded("gradient[" + tag + "]",
                              [&] { return check_gradient(transform, 50, seed); }));
  }
  if (spec.lambda == LambdaFamily::kUnitary || spec.lambda == LambdaFamily::kOrthogonal) {
    const std::size_t d_complex =
        spec.lambda == LambdaFamily::kUnitary ? spec.d : std::max<std::size_t>(1, spec.d / 2);
    reports.push_back(guarded("type_correspondence", [&] {
      return check_type_correspondence(d_complex, 100, seed);
    }));
  }
  return reports;
}

int run_check(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  EncodingSpec spec;
  try {
    spec = effective_spec(cfg);
  } catch (const SpecError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (cfg.n == 0 || cfg.n > 256) {
    err << "error: check needs 1 <= n <= 256\n";
    return kExitUsage;
  }
  const auto reports = check_suite(spec, cfg.n, cfg.seed);
  std::size_t passed = 0;
  for (const auto& r : reports) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " max_error=" << format_double(r.max_error, "%.3e")
        << " tol=" << format_double(r.tolerance, "%.1e") << " cases=" << r.cases << "\n";
    if (r.passed) ++passed;
  }
  out << passed << "/" << reports.size() << " properties passed\n";
  if (!cfg.out.empty()) {
    const std::string payload =
        cfg.format == Format::kJson ? reports_to_json(reports) : reports_to_csv(reports);
    std::ostringstream sink;
    if (!emit(cfg, payload, sink, err)) return kExitIo;
  }
  return passed == reports.size() ? kExitOk : kExitPropertyFailure;
}

int run_bench(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  EncodingSpec spec;
  try {
    spec = effective_spec(cfg);
  } catch (const SpecError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  const auto linear_sizes = cfg.sizes.empty() ? kDefaultLinearSizes : cfg.sizes;
  const auto vanilla_sizes = cfg.vanilla_sizes.empty() ? kDefaultVanillaSizes : cfg.vanilla_sizes;
  for (const auto* sizes : {&linear_sizes, &vanilla_sizes}) {
    if (sizes->size() < 4) {
      err << "error: need at least 4 sizes per path\n";
      return kExitUsage;
    }
    for (std::size_t i = 1; i < sizes->size(); ++i) {
      if ((*sizes)[i] <= (*sizes)[i - 1]) {
        err << "error: sizes must be strictly increasing\n";
        return kExitUsage;
      }
    }
  }
  if (!cfg.out.empty()) {
    std::ofstream probe(cfg.out, std::ios::binary | std::ios::app);
    if (!probe) {
      err << "error: cannot open '" << cfg.out << "' for writing\n";
      return kExitIo;
    }
  }

  const PositionTransform transform(spec);
  const std::size_t d = spec.d;

  auto make_inputs = [&](const std::vector<std::size_t>& sizes, bool encoded) {
    std::map<std::size_t, AttentionInput> inputs;
    for (std::size_t n : sizes) {
      Rng rng(cfg.seed ^ splitmix64(n));
      AttentionInput inp;
      inp.q = random_mat(rng, n, d);
      inp.k = random_mat(rng, n, d);
      inp.v = random_mat(rng, n, d);
      inp.causal = cfg.causal;
      if (encoded) inp.encoding = transform;
      inputs.emplace(n, std::move(inp));
    }
    return inputs;
  };

  BenchReport report;
  auto record = [&](const verify::ScalingFit& fit, const std::string& encoding,
                    const std::string& p_matrix) {
    for (std::size_t i = 0; i < fit.sizes.size(); ++i) {
      for (std::size_t trial = 0; trial < fit.trial_times[i].size(); ++trial) {
        report.rows.push_back({encoding, p_matrix, fit.sizes[i], d, trial,
                               static_cast<std::int64_t>(std::llround(fit.trial_times[i][trial] * 1e9))});
      }
    }
    report.fits.push_back({encoding, p_matrix, d, fit.slope, fit.r2});
  };

  try {
    const auto linear_inputs = make_inputs(linear_sizes, true);
    const auto linear_fit = verify::fit_scaling(
        [&](std::size_t n) { (void)lrpe_linear_attention(linear_inputs.at(n)); }, linear_sizes,
        cfg.trials);
    record(linear_fit, std::string(to_string(spec.lambda)), std::string(to_string(spec.p)));

    const auto vanilla_inputs = make_inputs(vanilla_sizes, false);
    const auto vanilla_fit = verify::fit_scaling(
        [&](std::size_t n) { (void)vanilla_attention(vanilla_inputs.at(n)); }, vanilla_sizes,
        cfg.trials);
    record(vanilla_fit, "vanilla", "none");
  } catch (const std::exception& e) {
    err << "error: benchmark aborted: " << e.what() << "\n";
    return kExitPropertyFailure;
  }

  const std::string payload = cfg.format == Format::kJson ? to_json(report) : to_csv(report);
  if (!emit(cfg, payload, out, err)) return kExitIo;
  if (!cfg.out.empty()) {
    for (const auto& fit : report.fits) {
      out << fit.encoding << ":" << fit.p_matrix << " slope=" << format_double(fit.slope, "%.3f")
          << " r2=" << format_double(fit.r2, "%.4f") << "\n";
    }
  }
  return kExitOk;
}

int run_dump(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  EncodingSpec spec;
  try {
    spec = effective_spec(cfg);
  } catch (const SpecError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (cfg.n == 0 || cfg.n > 256) {
    err << "error: dump needs 1 <= n <= 256\n";
    return kExitUsage;
  }
  const PositionTransform transform(spec);
  std::string payload;
  if (cfg.format == Format::kJson) {
    nlohmann::json doc;
    doc["spec"] = render_spec(spec);
    doc["matrices"] = nlohmann::json::array();
    for (std::size_t s = 0; s < cfg.n; ++s) {
      const Mat w = transform.materialize(static_cast<std::int64_t>(s));
      nlohmann::json re = nlohmann::json::array();
      nlohmann::json im = nlohmann::json::array();
      for (std::size_t i = 0; i < w.rows(); ++i) {
        std::vector<double> rr;
        std::vector<double> ii;
        for (std::size_t j = 0; j < w.cols(); ++j) {
          rr.push_back(w.re(i, j));
          ii.push_back(w.im(i, j));
        }
        re.push_back(rr);
        im.push_back(ii);
      }
      doc["matrices"].push_back({{"s", s}, {"re", re}, {"im", im}});
    }
    payload = doc.dump(2) + "\n";
  } else {
    payload = "s,row,col,re,im\n";
    for (std::size_t s = 0; s < cfg.n; ++s) {
      const Mat w = transform.materialize(static_cast<std::int64_t>(s));
      for (std::size_t i = 0; i < w.rows(); ++i) {
        for (std::size_t j = 0; j < w.cols(); ++j) {
          payload += std::to_string(s) + "," + std::to_string(i) + "," + std::to_string(j) +
                     "," + format_double(w.re(i, j)) + "," + format_double(w.im(i, j)) + "\n";
        }
      }
    }
  }
  return emit(cfg, payload, out, err) ? kExitOk : kExitIo;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig cfg;
  try {
    cfg = parse_args(args);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  switch (cfg.subcommand) {
    case Subcommand::kCheck: return run_check(cfg, out, err);
    case Subcommand::kBench: return run_bench(cfg, out, err);
    case Subcommand::kDump: return run_dump(cfg, out, err);
  }
  return kExitUsage;
}

std::string to_csv(const BenchReport& report) {
  std::string csv(kBenchHeader);
  csv += "\n";
  for (const auto& row : report.rows) {
    csv += row.encoding + "," + row.p_matrix + "," + std::to_string(row.n) + "," +
           std::to_string(row.d) + "," + std::to_string(row.trial) + "," +
           std::to_string(row.wall_ns) + "\n";
  }
  for (const auto& fit : report.fits) {
    const std::string prefix = fit.encoding + "," + fit.p_matrix + ",," + std::to_string(fit.d);
    csv += prefix + ",slope," + format_double(fit.slope, "%.6f") + "\n";
    csv += prefix + ",r2," + format_double(fit.r2, "%.6f") + "\n";
  }
  return csv;
}

BenchReport parse_bench_csv(std::string_view text) {
  BenchReport report;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kBenchHeader) {
    throw std::invalid_argument("bench csv: missing header");
  }
  std::map<std::string, BenchFit> fits;
  std::vector<std::string> order;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 6) throw std::invalid_argument("bench csv: expected 6 fields: " + line);
    if (f[4] == "slope" || f[4] == "r2") {
      const std::string key = f[0] + "," + f[1];
      if (!fits.count(key)) order.push_back(key);
      BenchFit& fit = fits[key];
      fit.encoding = f[0];
      fit.p_matrix = f[1];
      fit.d = to_size(f[3]);
      (f[4] == "slope" ? fit.slope : fit.r2) = std::stod(f[5]);
      continue;
    }
    report.rows.push_back({f[0], f[1], to_size(f[2]), to_size(f[3]), to_size(f[4]),
                           static_cast<std::int64_t>(std::stoll(f[5]))});
  }
  for (const auto& key : order) report.fits.push_back(fits[key]);
  return report;
}

std::string to_json(const BenchReport& report) {
  nlohmann::json doc;
  doc["rows"] = nlohmann::json::array();
  for (const auto& row : report.rows) {
    doc["rows"].push_back({{"encoding", row.encoding},
                           {"p_matrix", row.p_matrix},
                           {"n", row.n},
                           {"d", row.d},
                           {"trial", row.trial},
                           {"wall_ns", row.wall_ns}});
  }
  doc["fits"] = nlohmann::json::array();
  for (const auto& fit : report.fits) {
    doc["fits"].push_back({{"encoding", fit.encoding},
                           {"p_matrix", fit.p_matrix},
                           {"d", fit.d},
                           {"slope", fit.slope},
                           {"r2", fit.r2}});
  }
  return doc.dump(2) + "\n";
}

std::string reports_to_csv(const std::vector<verify::PropertyReport>& reports) {
  std::string csv = "name,max_error,tolerance,passed,cases\n";
  for (const auto& r : reports) {
    std::string name = r.name;
    for (char& c : name) {
      if (c == ',') c = ';';
    }
    csv += name + "," + format_double(r.max_error) + "," + format_double(r.tolerance) + "," +
           (r.passed ? "true" : "false") + "," + std::to_string(r.cases) + "\n";
  }
  return csv;
}

std::string reports_to_json(const std::vector<verify::PropertyReport>& reports) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& r : reports) {
    doc.push_back({{"name", r.name},
                   {"max_error", std::isnan(r.max_error) ? nlohmann::json(nullptr)
                                                         : nlohmann::json(r.max_error)},
                   {"tolerance", r.tolerance},
                   {"passed", r.passed},
                   {"cases", r.cases}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace lrpe::cli
