#pragma once

#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "phasesense/state_zoo.hpp"

namespace phasesense::io {

/// CSV with a header row, '.' decimal separator, values at full double
/// precision (round-trip exact).
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& labels, const std::vector<double>& values);
    void row(const std::vector<double>& values) { row({}, values); }
    void flush() { out_.flush(); }

  private:
    std::ofstream out_;
    std::size_t columns_;
};

std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    int column(const std::string& name) const;
    double value(std::size_t row, const std::string& name) const;
};
CsvTable read_csv(const std::string& path);

/// "lo:hi:count" or "lo:hi:count:log".
std::vector<double> parse_grid(const std::string& text);

/// Comma-separated list of doubles / integers.
std::vector<double> parse_list(const std::string& text);

/// State text forms, e.g. "fock:8", "gaussian:5", "cat:n=5",
/// "moon:delta=2,n=8", "gkp:delta=0.4", "np:spacing=4,n=8", "focksup:6,10".
/// An "n=" entry (or the positional shorthand of occupation-solved families)
/// requests solve_for_occupation at that target.
struct ParsedState {
    zoo::StateSpec spec;
    std::optional<double> target_n;
    std::string label;
};
ParsedState parse_state(const std::string& text);

/// Resolves the occupation target, if any, and returns the concrete spec.
zoo::StateSpec resolve_state(const ParsedState& parsed, double tol = 1e-6);

/// Index-parallel loop; results must be written to disjoint slots.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace phasesense::io
