#include "hyperrate/report.hpp"

#include <cstdio>
#include <fstream>

#include "hyperrate/error.hpp"
#include "json.hpp"

namespace hyperrate {

using nlohmann::ordered_json;

std::string version() { return "0.1.0"; }

Format parse_format(const std::string& s) {
  if (s == "text") return Format::text;
  if (s == "csv") return Format::csv;
  if (s == "json" || s == "structured") return Format::json;
  throw ValidationError("unknown format '" + s + "'");
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  return s == "-0.000000" ? "0.000000" : s;
}

namespace {

void comment_header(std::ostream& os, const ReportHeader& h, const char* lead) {
  os << lead << "hyperrate " << version() << "\n";
  os << lead << "command: " << h.command << "\n";
  os << lead << "instance: " << h.instance_hash << "\n";
  os << lead << "seed: " << h.seed << "\n";
  for (const auto& [k, v] : h.settings) os << lead << k << ": " << v << "\n";
}

ordered_json json_header(const ReportHeader& h) {
  ordered_json j;
  j["version"] = version();
  j["command"] = h.command;
  j["instance"] = h.instance_hash;
  j["seed"] = h.seed;
  ordered_json s = ordered_json::object();
  for (const auto& [k, v] : h.settings) s[k] = v;
  j["settings"] = s;
  return j;
}

std::string row_label(const TestChannel& ch, std::size_t in, const ProblemInstance& inst) {
  std::string s;
  std::size_t rem = in;
  std::vector<std::string> parts(ch.inputs.size());
  for (std::size_t k = ch.inputs.size(); k-- > 0;) {
    parts[k] = inst.pmf.axis(ch.inputs[k]).labels[rem % ch.input_shape[k]];
    rem /= ch.input_shape[k];
  }
  for (std::size_t k = 0; k < parts.size(); ++k) s += (k ? "," : "") + parts[k];
  return s;
}

std::string out_label(const TestChannel& ch, std::size_t out, const std::vector<const MaximalHypergraph*>& hs) {
  auto d = ch.unflatten_output(out);
  std::string s;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (k) s += "x";
    s += k < hs.size() && hs[k] ? edge_string(*hs[k], hs[k]->edges[d[k]]) : std::to_string(d[k]);
  }
  return s;
}

void channel_text(std::ostream& os, const TestChannel& ch, const ProblemInstance& inst,
                  const std::vector<const MaximalHypergraph*>& hs) {
  os << "channel " << ch.name << "\n";
  for (std::size_t r = 0; r < ch.input_size(); ++r) {
    os << "  " << row_label(ch, r, inst) << ":";
    for (std::size_t o = 0; o < ch.output_size(); ++o)
      if (ch.at(r, o) > 0.0) os << " " << out_label(ch, o, hs) << "=" << fixed6(ch.at(r, o));
    os << "\n";
  }
}

ordered_json channel_json(const TestChannel& ch) {
  return {{"name", ch.name}, {"inputs", ch.inputs}, {"input_shape", ch.input_shape},
          {"output_shape", ch.output_shape}, {"probs", ch.probs}};
}

void hypergraph_text(std::ostream& os, const MaximalHypergraph& h, const std::string& title) {
  os << title << " eps=" << fixed6(h.eps) << " edges=" << h.edges.size() << " overlap="
     << (edges_overlap(h) ? "yes" : "no") << "\n";
  for (std::size_t e = 0; e < h.edges.size(); ++e) {
    os << "  " << edge_string(h, h.edges[e]);
    for (std::size_t c = 0; c < h.balls[e].size(); ++c) {
      const auto& b = h.balls[e][c];
      if (!b) continue;
      os << (h.balls[e].size() > 1 ? " [" + h.context_labels[c] + "]" : std::string()) << " center=(";
      for (std::size_t i = 0; i < b->center.size(); ++i) os << (i ? "," : "") << fixed6(b->center[i]);
      os << ") radius=" << fixed6(b->radius);
    }
    os << "\n";
  }
}

ordered_json hypergraph_json(const MaximalHypergraph& h) {
  ordered_json edges = ordered_json::array();
  for (std::size_t e = 0; e < h.edges.size(); ++e) {
    ordered_json balls = ordered_json::array();
    for (const auto& b : h.balls[e])
      balls.push_back(b ? ordered_json{{"center", b->center}, {"radius", b->radius}} : ordered_json());
    std::vector<std::string> mem;
    for (auto x : members(h.edges[e])) mem.push_back(h.labels[x]);
    edges.push_back({{"members", mem}, {"balls", balls}});
  }
  return {{"eps", h.eps}, {"overlap", edges_overlap(h)}, {"fingerprint", fingerprint(h)}, {"edges", edges}};
}

// Consecutive weights landing on the same vertex collapse to the first.
std::vector<RegionRow> distinct_rows(const RateRegion& r) {
  std::vector<RegionRow> out;
  for (const auto& row : r.rows)
    if (out.empty() || out.back().vertex != row.vertex) out.push_back(row);
  return out;
}

void region_csv(std::ostream& os, const ReportHeader& hdr, const RateRegion& r) {
  if (r.frontier.empty()) throw ValidationError("region has an empty frontier");
  comment_header(os, hdr, "# ");
  os << "weight,R1,R2\n";
  for (const auto& row : distinct_rows(r)) os << fixed6(row.weight) << "," << fixed6(row.r1) << "," << fixed6(row.r2) << "\n";
}

}  // namespace

void emit_hypergraph(std::ostream& os, const ReportHeader& hdr, const ProblemInstance& inst,
                     const std::vector<MaximalHypergraph>& hs, const HypergraphPair* pair, Format fmt) {
  if (fmt == Format::json) {
    auto j = json_header(hdr);
    j["setting"] = std::string(to_string(inst.setting));
    ordered_json arr = ordered_json::array();
    for (const auto& h : hs) arr.push_back(hypergraph_json(h));
    j["hypergraphs"] = arr;
    if (pair) {
      j["pair"] = {{"side1", hypergraph_json(pair->sides[0])}, {"side2", hypergraph_json(pair->sides[1])},
                   {"admissible", pair->admissible}};
    }
    os << j.dump(2) << "\n";
    return;
  }
  if (fmt == Format::csv) {
    comment_header(os, hdr, "# ");
    os << "hypergraph,edge,members,context,center,radius\n";
    auto rows = [&](const MaximalHypergraph& h, const std::string& tag) {
      for (std::size_t e = 0; e < h.edges.size(); ++e)
        for (std::size_t c = 0; c < h.balls[e].size(); ++c) {
          const auto& b = h.balls[e][c];
          if (!b) continue;
          std::string center;
          for (std::size_t i = 0; i < b->center.size(); ++i) center += (i ? ";" : "") + fixed6(b->center[i]);
          os << tag << "," << e << ",\"" << edge_string(h, h.edges[e]) << "\"," << c << "," << center << ","
             << fixed6(b->radius) << "\n";
        }
    };
    for (std::size_t i = 0; i < hs.size(); ++i) rows(hs[i], std::to_string(i));
    if (pair) {
      rows(pair->sides[0], "side1");
      rows(pair->sides[1], "side2");
    }
    return;
  }
  comment_header(os, hdr, "# ");
  os << "setting: " << to_string(inst.setting) << "\n";
  for (std::size_t i = 0; i < hs.size(); ++i)
    hypergraph_text(os, hs[i], "hypergraph " + inst.function(i).name);
  if (pair) {
    hypergraph_text(os, pair->sides[0], "side 1");
    hypergraph_text(os, pair->sides[1], "side 2");
    os << "admissible pairs (rows side 1, columns side 2)\n";
    for (std::size_t a = 0; a < pair->admissible.size(); ++a) {
      os << "  " << edge_string(pair->sides[0], pair->sides[0].edges[a]) << ":";
      for (auto v : pair->admissible[a]) os << " " << int(v);
      os << "\n";
    }
  }
}

void emit_rate(std::ostream& os, const ReportHeader& hdr, const ProblemInstance& inst, const RateResult& r,
               Format fmt) {
  if (fmt == Format::json) {
    auto j = json_header(hdr);
    j["rate"] = r.rate;
    j["method"] = r.diagnostics.method;
    j["iterations"] = r.diagnostics.iterations;
    j["lower_bound"] = r.diagnostics.lower_bound;
    ordered_json hs = ordered_json::array();
    for (const auto& h : r.hypergraphs) hs.push_back(hypergraph_json(h));
    j["hypergraphs"] = hs;
    ordered_json chs = ordered_json::array();
    for (const auto& c : r.channels) chs.push_back(channel_json(c));
    j["channels"] = chs;
    os << j.dump(2) << "\n";
    return;
  }
  comment_header(os, hdr, "# ");
  if (fmt == Format::csv) {
    os << "rate,method,iterations,lower_bound\n"
       << fixed6(r.rate) << "," << r.diagnostics.method << "," << r.diagnostics.iterations << ","
       << fixed6(r.diagnostics.lower_bound) << "\n";
    return;
  }
  os << "rate: " << fixed6(r.rate) << "\n";
  os << "method: " << r.diagnostics.method << "\n";
  os << "iterations: " << r.diagnostics.iterations << "\n";
  if (r.diagnostics.lower_bound > 0.0) os << "lower bound: " << fixed6(r.diagnostics.lower_bound) << "\n";
  std::vector<const MaximalHypergraph*> hs;
  if (r.pair) {
    hs = {&r.pair->sides[0], &r.pair->sides[1]};
    for (std::size_t c = 0; c < r.channels.size(); ++c) {
      os << "edges " << (c + 1) << ": " << edges_string(r.pair->sides[c]) << "\n";
      channel_text(os, r.channels[c], inst, {hs[c]});
    }
    return;
  }
  for (const auto& h : r.hypergraphs) {
    os << "edges: " << edges_string(h) << "\n";
    hs.push_back(&h);
  }
  for (const auto& c : r.channels) channel_text(os, c, inst, hs);
}

void emit_region(std::ostream& os, const ReportHeader& hdr, const RateRegion& r, Format fmt) {
  if (fmt == Format::csv) return region_csv(os, hdr, r);
  if (fmt == Format::json) {
    auto j = json_header(hdr);
    ordered_json fr = ordered_json::array();
    for (const auto& v : r.frontier) fr.push_back({v.r1, v.r2});
    j["frontier"] = fr;
    ordered_json rows = ordered_json::array();
    for (const auto& row : r.rows) rows.push_back({{"weight", row.weight}, {"R1", row.r1}, {"R2", row.r2}});
    j["rows"] = rows;
    j["min_sum_rate"] = r.frontier.empty() ? 0.0 : r.min_sum_rate();
    os << j.dump(2) << "\n";
    return;
  }
  comment_header(os, hdr, "# ");
  os << "frontier vertices: " << r.frontier.size() << "\n";
  for (const auto& v : r.frontier) os << "  (" << fixed6(v.r1) << ", " << fixed6(v.r2) << ")\n";
  if (!r.frontier.empty()) os << "min sum rate: " << fixed6(r.min_sum_rate()) << "\n";
  os << "weight R1 R2\n";
  for (const auto& row : r.rows) os << "  " << fixed6(row.weight) << " " << fixed6(row.r1) << " " << fixed6(row.r2) << "\n";
}

void emit_region_csv(const RateRegion& r, const std::filesystem::path& path, const ReportHeader& hdr) {
  if (r.frontier.empty()) throw ValidationError("region has an empty frontier");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  region_csv(out, hdr, r);
  if (!out) throw Error("write failed for " + path.string());
}

void emit_curve(std::ostream& os, const ReportHeader& hdr, const Curve& c, Format fmt) {
  if (fmt == Format::json) {
    auto j = json_header(hdr);
    ordered_json pts = ordered_json::array();
    for (const auto& p : c.points)
      pts.push_back({{"eps", p.eps}, {"rate", p.rate}, {"fingerprint", p.fingerprint}, {"edges", p.edges}});
    j["points"] = pts;
    j["breakpoints"] = c.breakpoints;
    os << j.dump(2) << "\n";
    return;
  }
  comment_header(os, hdr, "# ");
  if (fmt == Format::csv) {
    os << "eps,rate,fingerprint\n";
    for (const auto& p : c.points) os << fixed6(p.eps) << "," << fixed6(p.rate) << "," << p.fingerprint << "\n";
    return;
  }
  os << "eps rate edges\n";
  for (const auto& p : c.points) os << "  " << fixed6(p.eps) << " " << fixed6(p.rate) << " " << p.edges << "\n";
  os << "breakpoints:";
  for (double b : c.breakpoints) os << " " << fixed6(b);
  os << "\n";
}

void emit_markov(std::ostream& os, const ReportHeader& hdr, const MarkovBound& b, const SparsityReport& s,
                 Format fmt) {
  std::string assignment;
  for (std::size_t i = 0; i < s.assignment.size(); ++i)
    assignment += (i ? " " : "") + edge_string(s.hypergraph, s.hypergraph.edges[s.assignment[i]]);
  if (fmt == Format::json) {
    auto j = json_header(hdr);
    j["k"] = b.k;
    j["ktile_rate"] = b.ktile;
    j["skip_entropy"] = b.skip;
    j["bound"] = b.bound;
    j["edges"] = edges_string(s.hypergraph);
    j["sparsity"] = {{"s", s.s}, {"assignment", assignment}, {"exhaustive", s.exhaustive},
                     {"reduced_dimension", s.reduced_dimension}, {"naive_dimension", s.naive_dimension}};
    os << j.dump(2) << "\n";
    return;
  }
  comment_header(os, hdr, "# ");
  if (fmt == Format::csv) {
    os << "k,ktile_rate,skip_entropy,bound,s,reduced_dimension,naive_dimension\n"
       << b.k << "," << fixed6(b.ktile) << "," << fixed6(b.skip) << "," << fixed6(b.bound) << "," << s.s << ","
       << s.reduced_dimension << "," << s.naive_dimension << "\n";
    return;
  }
  os << "k: " << b.k << "\n";
  os << "ktile rate: " << fixed6(b.ktile) << "\n";
  os << "skip entropy: " << fixed6(b.skip) << "\n";
  os << "bound: " << fixed6(b.bound) << "\n";
  os << "edges: " << edges_string(s.hypergraph) << "\n";
  os << "assignment: " << assignment << (s.exhaustive ? "" : " (greedy)") << "\n";
  os << "sparsity: " << s.s << "\n";
  os << "dimension: " << s.reduced_dimension << " vs " << s.naive_dimension << "\n";
}

void emit_checks(std::ostream& os, const ReportHeader& hdr, const std::vector<Check>& checks, Format fmt) {
  if (fmt == Format::json) {
    auto j = json_header(hdr);
    ordered_json arr = ordered_json::array();
    for (const auto& c : checks) arr.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    j["checks"] = arr;
    os << j.dump(2) << "\n";
    return;
  }
  comment_header(os, hdr, "# ");
  if (fmt == Format::csv) {
    os << "check,result,detail\n";
    for (const auto& c : checks) os << c.name << "," << (c.pass ? "PASS" : "FAIL") << ",\"" << c.detail << "\"\n";
    return;
  }
  for (const auto& c : checks) os << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
}

}  // namespace hyperrate
