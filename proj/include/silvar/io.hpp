#ifndef SILVAR_IO_HPP
#define SILVAR_IO_HPP

#include "silvar/types.hpp"

#include <string>
#include <vector>

namespace silvar::io {

/// Model files are JSON with fields {mode, order, knots, values, A, L,
/// lambda_s, lambda_l, shape}; matrices row-major, floats as shortest
/// round-trip decimals so deserialize(serialize(m)) is bit-identical.
std::string serialize_model(const SilvarModel& model);

/// Throws std::runtime_error on malformed input.
SilvarModel deserialize_model(const std::string& bytes);

void save_model(const SilvarModel& model, const std::string& path);
SilvarModel load_model(const std::string& path);

std::string serialize_report(const FitReport& report);
void save_report(const FitReport& report, const std::string& path);

/// CSV table: first row is the header, one column per variable, one row per
/// sample. In memory we keep the transposed (variable x sample) matrix.
struct CsvTable {
    std::vector<std::string> names;
    Matrix columns_as_rows;  // row i = variable names[i], one column per sample
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& names,
               const Matrix& columns_as_rows);

/// Splits a table into a Dataset using the header convention: names starting
/// with 'y' are responses, 'x' regressors, "time" becomes timestamps.
Dataset dataset_from_table(const CsvTable& table);

}  // namespace silvar::io

#endif
