#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stripflow/assembly.hpp"
#include "stripflow/quotients.hpp"

namespace stripflow {

// JSON documents. Readers throw ValidationError with the path of the bad key.
std::string graph_to_json(const MetricGraph& g);
MetricGraph graph_from_json(const std::string& text);

/// Graph document plus "coefficients", "fiber" and (when present) "treebolic".
std::string complex_to_json(const StripComplex& sc);
StripComplex complex_from_json(const std::string& text);

std::string quotient_map_to_json(const QuotientMap& map);
QuotientMap quotient_map_from_json(const std::string& text);

/// Writes stiffness.txt (row col value triplets) and discretization.json
/// (space, grid parameters, boundary policy, masses, node coordinates).
/// Returns the files written.
std::vector<std::filesystem::path> write_discretization(const Discretization& d,
                                                        const std::filesystem::path& dir);

/// Reassembles from the sidecar and verifies masses and triplets against the
/// stored files (relative 1e-12); a mismatch is a ValidationError.
Discretization read_discretization(const std::filesystem::path& dir);

/// Self-describing CSV: a header row, then a units row, then data.
class CsvTable {
public:
    CsvTable(std::vector<std::string> columns, std::vector<std::string> units);

    void add_row(const std::vector<double>& values);
    void add_row(std::vector<std::string> cells);
    std::size_t rows() const noexcept { return rows_.size(); }

    std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::string> units_;
    std::vector<std::vector<std::string>> rows_;
};

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// 64-bit FNV-1a, as 16 hex digits.
std::string digest(const std::string& bytes);
std::string file_digest(const std::filesystem::path& path);

}  // namespace stripflow
