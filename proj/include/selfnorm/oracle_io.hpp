#pragma once

// Versioned text format for oracle tables:
//
//   # selfnorm oracle table
//   version 1
//   kind G3
//   paths 100000
//   steps 10000
//   seed 42
//   build selfnorm-1.0.0
//   pairs 100000
//   <x> <cdf>        one sorted pair per line, cdf = k / pairs
//
// The loader rebuilds the sorted sample from the x column.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

#include "selfnorm/errors.hpp"
#include "selfnorm/limit_laws.hpp"

namespace selfnorm {

inline constexpr int kOracleFormatVersion = 1;

inline LawKind parse_oracle_kind(const std::string& name) {
  for (auto kind : {LawKind::G1, LawKind::G2, LawKind::G3Oracle, LawKind::G4Oracle}) {
    if (name == to_string(kind)) return kind;
  }
  throw ConfigError("unknown oracle kind '" + name + "'");
}

inline std::string oracle_file_name(LawKind kind) {
  std::string name(to_string(kind));
  for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return name + ".oracle";
}

inline void write_oracle_table(const OracleTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open oracle table for writing: " + path.string());
  out << "# selfnorm oracle table\n"
      << "version " << kOracleFormatVersion << "\n"
      << "kind " << to_string(table.kind) << "\n"
      << "paths " << table.paths << "\n"
      << "steps " << table.steps << "\n"
      << "seed " << table.seed << "\n"
      << "build " << table.build_stamp << "\n"
      << "pairs " << table.sorted.size() << "\n";
  const auto m = static_cast<double>(table.sorted.size());
  char buffer[64];
  for (std::size_t k = 0; k < table.sorted.size(); ++k) {
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, table.sorted[k]);
    out.write(buffer, end - buffer);
    out.put(' ');
    auto [end2, ec2] = std::to_chars(buffer, buffer + sizeof buffer, static_cast<double>(k + 1) / m);
    out.write(buffer, end2 - buffer);
    out.put('\n');
  }
  if (!out) throw IoError("failed writing oracle table: " + path.string());
}

inline OracleTable read_oracle_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DependencyError("oracle table not found: " + path.string());
  OracleTable table;
  std::string line;
  std::size_t pairs = 0;
  bool header_done = false;
  while (!header_done && std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    if (key == "version") {
      int version = 0;
      fields >> version;
      if (version != kOracleFormatVersion) {
        throw IoError("unsupported oracle table version in " + path.string());
      }
    } else if (key == "kind") {
      std::string kind;
      fields >> kind;
      table.kind = parse_oracle_kind(kind);
    } else if (key == "paths") {
      fields >> table.paths;
    } else if (key == "steps") {
      fields >> table.steps;
    } else if (key == "seed") {
      fields >> table.seed;
    } else if (key == "build") {
      std::getline(fields >> std::ws, table.build_stamp);
    } else if (key == "pairs") {
      fields >> pairs;
      header_done = true;
    } else {
      throw IoError("unexpected header field '" + key + "' in " + path.string());
    }
  }
  if (!header_done) throw IoError("truncated oracle table header in " + path.string());
  table.sorted.reserve(pairs);
  while (table.sorted.size() < pairs && std::getline(in, line)) {
    const char* first = line.data();
    const char* last = line.data() + line.size();
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, x);
    if (ec != std::errc{}) throw IoError("malformed oracle pair in " + path.string());
    if (!table.sorted.empty() && x < table.sorted.back()) {
      throw IoError("oracle table is not sorted: " + path.string());
    }
    table.sorted.push_back(x);
  }
  if (table.sorted.size() != pairs) throw IoError("oracle table shorter than declared: " + path.string());
  return table;
}

}  // namespace selfnorm
