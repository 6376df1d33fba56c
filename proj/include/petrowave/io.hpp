#pragma once

// CSV readers/writers and small file utilities.  All numeric output uses 17
// significant digits ('.' decimal) so re-parsing reproduces the doubles
// bit-exactly.

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "petrowave/energy.hpp"
#include "petrowave/state.hpp"
#include "petrowave/util.hpp"

namespace petrowave {

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

inline double parse_double(const std::string& s, int line_no,
                           const std::string& path) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str())
    throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                             ": not a number: '" + s + "'");
  return v;
}

}  // namespace detail

inline std::string energy_csv_text(const EnergyTrace& trace) {
  std::string out =
      "t,E,dissipation,lower_bound,kin1,kin2,pot1,pot2,coupling\n";
  for (const auto& s : trace.samples) {
    out += format_g17(s.t);
    for (double v : {s.E, s.dissipation, s.lower_bound, s.kin1, s.kin2, s.pot1,
                     s.pot2, s.coupling}) {
      out += ',';
      out += format_g17(v);
    }
    out += '\n';
  }
  return out;
}

inline void write_energy_csv(const std::string& path,
                             const EnergyTrace& trace) {
  write_text_file(path, energy_csv_text(trace));
}

inline EnergyTrace read_energy_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path + " for reading");
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty file");
  if (line != "t,E,dissipation,lower_bound,kin1,kin2,pot1,pot2,coupling")
    throw std::runtime_error(path + ": unexpected energy CSV header");
  EnergyTrace trace;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != 9)
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": expected 9 columns");
    EnergySample s;
    s.t = detail::parse_double(cells[0], line_no, path);
    s.E = detail::parse_double(cells[1], line_no, path);
    s.dissipation = detail::parse_double(cells[2], line_no, path);
    s.lower_bound = detail::parse_double(cells[3], line_no, path);
    s.kin1 = detail::parse_double(cells[4], line_no, path);
    s.kin2 = detail::parse_double(cells[5], line_no, path);
    s.pot1 = detail::parse_double(cells[6], line_no, path);
    s.pot2 = detail::parse_double(cells[7], line_no, path);
    s.coupling = detail::parse_double(cells[8], line_no, path);
    trace.samples.push_back(s);
  }
  trace.fingerprint = fingerprint_trace(trace);
  return trace;
}

inline std::string states_csv_text(const std::vector<SimState>& states,
                                   int mode_count) {
  std::string out = "t";
  for (const char* name : {"u1", "u2", "v1", "v2"})
    for (int k = 1; k <= mode_count; ++k)
      out += "," + std::string(name) + "_" + std::to_string(k);
  out += '\n';
  for (const auto& s : states) {
    out += format_g17(s.t);
    for (const auto* f : {&s.u1, &s.u2, &s.v1, &s.v2})
      for (double c : f->coeffs) {
        out += ',';
        out += format_g17(c);
      }
    out += '\n';
  }
  return out;
}

inline void write_states_csv(const std::string& path,
                             const std::vector<SimState>& states,
                             int mode_count) {
  write_text_file(path, states_csv_text(states, mode_count));
}

inline std::string envelope_csv_text(const std::vector<double>& ts,
                                     const std::vector<double>& values) {
  if (ts.size() != values.size())
    throw std::invalid_argument("envelope CSV: size mismatch");
  std::string out = "t,value\n";
  for (std::size_t i = 0; i < ts.size(); ++i)
    out += format_g17(ts[i]) + "," + format_g17(values[i]) + "\n";
  return out;
}

inline std::string comparison_csv_text(const std::vector<double>& ts,
                                       const std::vector<double>& energies,
                                       const std::vector<double>& envelopes,
                                       double C) {
  if (ts.size() != energies.size() || ts.size() != envelopes.size())
    throw std::invalid_argument("comparison CSV: size mismatch");
  std::string out = "t,E,envelope,ratio\n";
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double bound = C * envelopes[i];
    out += format_g17(ts[i]) + "," + format_g17(energies[i]) + "," +
           format_g17(envelopes[i]) + "," + format_g17(energies[i] / bound) +
           "\n";
  }
  return out;
}

}  // namespace petrowave
