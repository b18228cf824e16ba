#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lrpe/verify.hpp"

namespace lrpe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPropertyFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

enum class Subcommand { kCheck, kBench, kDump };
enum class Format { kCsv, kJson };

inline constexpr std::string_view kDefaultBenchSpec = "orthogonal:householder:a:32";

struct CliConfig {
  Subcommand subcommand = Subcommand::kCheck;
  std::string spec;
  std::size_t n = 32;
  std::optional<std::size_t> d;
  std::size_t trials = 3;
  std::uint64_t seed = 0;
  bool causal = false;
  std::string out;
  Format format = Format::kCsv;
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> vanilla_sizes;

  bool operator==(const CliConfig& other) const = default;
};

/// Thrown for malformed command lines.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parses argv[1..] (subcommand first). Throws UsageError.
CliConfig parse_args(const std::vector<std::string>& args);
/// Inverse of parse_args: parse_args(render_args(cfg)) == cfg.
std::vector<std::string> render_args(const CliConfig& cfg);

/// The spec the run uses: --spec (or the bench default) with --d applied and
/// --seed filled in when the spec text has none. Throws SpecError.
EncodingSpec effective_spec(const CliConfig& cfg);

/// Full front end; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_check(const CliConfig& cfg, std::ostream& out, std::ostream& err);
int run_bench(const CliConfig& cfg, std::ostream& out, std::ostream& err);
int run_dump(const CliConfig& cfg, std::ostream& out, std::ostream& err);

/// The property suite `check` runs for one spec.
std::vector<verify::PropertyReport> check_suite(const EncodingSpec& spec, std::size_t n,
                                                std::uint64_t seed);

struct BenchRow {
  std::string encoding;
  std::string p_matrix;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t trial = 0;
  std::int64_t wall_ns = 0;

  bool operator==(const BenchRow& other) const = default;
};

struct BenchFit {
  std::string encoding;
  std::string p_matrix;
  std::size_t d = 0;
  double slope = 0.0;
  double r2 = 0.0;
};

/// Timed rows plus one fitted log-log slope per path.
struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<BenchFit> fits;
};

inline constexpr std::string_view kBenchHeader = "encoding,p_matrix,n,d,trial,wall_ns";

/// Header, one line per row, then per fit a `slope` and an `r2` summary line
/// (n column empty, trial column naming the statistic, value in wall_ns).
std::string to_csv(const BenchReport& report);
/// Throws std::invalid_argument on malformed input.
BenchReport parse_bench_csv(std::string_view text);
std::string to_json(const BenchReport& report);

std::string reports_to_csv(const std::vector<verify::PropertyReport>& reports);
std::string reports_to_json(const std::vector<verify::PropertyReport>& reports);

}  // namespace lrpe::cli
