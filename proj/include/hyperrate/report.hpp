#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "hyperrate/hypergraph.hpp"
#include "hyperrate/markov.hpp"
#include "hyperrate/model.hpp"
#include "hyperrate/solver.hpp"

namespace hyperrate {

std::string version();

enum class Format { text, csv, json };
Format parse_format(const std::string& s);

// Run metadata written at the top of every output.
struct ReportHeader {
  std::string command;
  std::string instance_hash;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> settings;
};

std::string fixed6(double v);

void emit_hypergraph(std::ostream& os, const ReportHeader& hdr, const ProblemInstance& inst,
                     const std::vector<MaximalHypergraph>& hs, const HypergraphPair* pair, Format fmt);
void emit_rate(std::ostream& os, const ReportHeader& hdr, const ProblemInstance& inst, const RateResult& r,
               Format fmt);
void emit_region(std::ostream& os, const ReportHeader& hdr, const RateRegion& r, Format fmt);
// Throws ValidationError on an empty frontier, Error when the path cannot be written.
void emit_region_csv(const RateRegion& r, const std::filesystem::path& path, const ReportHeader& hdr);
void emit_curve(std::ostream& os, const ReportHeader& hdr, const Curve& c, Format fmt);
void emit_markov(std::ostream& os, const ReportHeader& hdr, const MarkovBound& b, const SparsityReport& s,
                 Format fmt);

struct Check {
  std::string name;
  bool pass = true;
  std::string detail;
};
void emit_checks(std::ostream& os, const ReportHeader& hdr, const std::vector<Check>& checks, Format fmt);

}  // namespace hyperrate
