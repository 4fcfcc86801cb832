#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "selfnorm/errors.hpp"
#include "selfnorm/harness/config.hpp"

namespace selfnorm {

enum class RegimeDecision { Degenerate, Brownian, NotTight, Inconclusive };

inline std::string_view to_string(RegimeDecision decision) {
  switch (decision) {
    case RegimeDecision::Degenerate: return "degenerate";
    case RegimeDecision::Brownian: return "brownian";
    case RegimeDecision::NotTight: return "not_tight";
    case RegimeDecision::Inconclusive: return "inconclusive";
  }
  return "?";
}

inline RegimeDecision parse_regime_decision(std::string_view name) {
  for (auto d : {RegimeDecision::Degenerate, RegimeDecision::Brownian, RegimeDecision::NotTight,
                 RegimeDecision::Inconclusive}) {
    if (name == to_string(d)) return d;
  }
  throw ConfigError("unknown regime decision '" + std::string(name) + "'");
}

/// One Monte Carlo summary statistic at one sample size.
struct Aggregate {
  std::size_t n = 0;
  std::string statistic;
  double value = 0.0;
  /// Monte Carlo standard error; for KS distances the asymptotic 5% critical value.
  double std_error = 0.0;
  std::size_t reps = 0;

  friend bool operator==(const Aggregate& a, const Aggregate& b) {
    auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return a.n == b.n && a.statistic == b.statistic && same(a.value, b.value) &&
           same(a.std_error, b.std_error) && a.reps == b.reps;
  }
};

struct OracleProvenance {
  std::uint64_t paths = 0;
  std::uint64_t steps = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const OracleProvenance&, const OracleProvenance&) = default;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::string run_id;
  std::vector<Aggregate> aggregates;
  RegimeDecision regime = RegimeDecision::Inconclusive;
  /// Variates drawn across all replications and sample sizes.
  std::uint64_t draws = 0;
  std::optional<OracleProvenance> oracle;
  /// Informational only; never serialized.
  double wall_seconds = 0.0;

  const Aggregate* find(std::size_t n, std::string_view statistic) const {
    for (const auto& a : aggregates) {
      if (a.n == n && a.statistic == statistic) return &a;
    }
    return nullptr;
  }

  /// Value of `statistic` at each n where it is present, in n_grid order.
  std::vector<double> series(std::string_view statistic) const {
    std::vector<double> out;
    for (std::size_t n : config.n_grid) {
      if (const auto* a = find(n, statistic)) out.push_back(a->value);
    }
    return out;
  }
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, v);
  return std::string(buffer, end);
}

inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

/// Stable identifier derived from the canonical config echo.
inline std::string make_run_id(const ExperimentConfig& config) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::uint64_t hash = fnv1a(config_echo(config).dump());
  std::string id(16, '0');
  for (int i = 15; i >= 0; --i, hash >>= 4) id[static_cast<std::size_t>(i)] = kHex[hash & 0xF];
  return id;
}

inline constexpr int kReportFormatVersion = 1;

inline nlohmann::json report_to_json(const ExperimentReport& report) {
  nlohmann::json aggregates = nlohmann::json::array();
  for (const auto& a : report.aggregates) {
    aggregates.push_back({{"n", a.n},
                          {"statistic", a.statistic},
                          {"value", number_or_null(a.value)},
                          {"stderr", number_or_null(a.std_error)},
                          {"reps", a.reps}});
  }
  nlohmann::json j = {{"format_version", kReportFormatVersion},
                      {"run_id", report.run_id},
                      {"config", config_echo(report.config)},
                      {"aggregates", std::move(aggregates)},
                      {"regime_decision", std::string(to_string(report.regime))},
                      {"draws", report.draws}};
  if (report.oracle) {
    j["oracle"] = {{"paths", report.oracle->paths}, {"steps", report.oracle->steps}, {"seed", report.oracle->seed}};
  }
  return j;
}

inline ExperimentReport report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kReportFormatVersion) {
      throw ConfigError("unsupported report format version");
    }
    ExperimentReport report;
    report.config = config_from_json(j.at("config"));
    report.run_id = j.at("run_id").get<std::string>();
    for (const auto& a : j.at("aggregates")) {
      report.aggregates.push_back({a.at("n").get<std::size_t>(), a.at("statistic").get<std::string>(),
                                   number_or_nan(a.at("value")), number_or_nan(a.at("stderr")),
                                   a.at("reps").get<std::size_t>()});
    }
    report.regime = parse_regime_decision(j.at("regime_decision").get<std::string>());
    report.draws = j.at("draws").get<std::uint64_t>();
    if (j.contains("oracle")) {
      const auto& o = j.at("oracle");
      report.oracle = OracleProvenance{o.at("paths").get<std::uint64_t>(), o.at("steps").get<std::uint64_t>(),
                                       o.at("seed").get<std::uint64_t>()};
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
}

inline constexpr std::string_view kCsvHeader = "run_id,experiment,family,alpha,p,n,statistic,value,stderr,reps,seed";

/// Appends the data rows of `report` (no header).
inline void append_csv_rows(const ExperimentReport& report, std::string& out) {
  const auto& c = report.config;
  const std::string prefix = report.run_id + "," + std::string(to_string(c.experiment)) + "," +
                             std::string(to_string(c.family.kind)) + "," + format_double(c.family.alpha) +
                             "," + format_double(c.p) + ",";
  for (const auto& a : report.aggregates) {
    out += prefix;
    out += std::to_string(a.n) + "," + a.statistic + "," + format_double(a.value) + "," +
           format_double(a.std_error) + "," + std::to_string(a.reps) + "," + std::to_string(c.master_seed) + "\n";
  }
}

inline std::string report_to_csv(const ExperimentReport& report) {
  std::string out(kCsvHeader);
  out += "\n";
  append_csv_rows(report, out);
  return out;
}

enum class ReportFormat { Csv, Json };

inline ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  throw ConfigError("unknown report format '" + std::string(name) + "'");
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

inline std::string render_report(const ExperimentReport& report, ReportFormat format) {
  return format == ReportFormat::Csv ? report_to_csv(report) : report_to_json(report).dump(2) + "\n";
}

inline void write_report(const ExperimentReport& report, ReportFormat format, const std::filesystem::path& path) {
  write_text_file(path, render_report(report, format));
}

inline ExperimentReport read_report_json(const std::filesystem::path& path) {
  return report_from_json(read_json_file(path));
}

}  // namespace selfnorm
