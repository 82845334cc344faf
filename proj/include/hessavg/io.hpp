#pragma once

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "hessavg/datagen.hpp"
#include "hessavg/solver.hpp"

namespace hessavg::io {

// Missing file, short read, malformed content.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kCsvVersionLine = "# hessavg-csv v1";

// CSV: version comment, a line "n,d" with the values, n rows of d values,
// then one row of n labels. Numbers are written with %.17g.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset_csv(const std::filesystem::path& path);

// Binary: "HAVG1", u64 n, u64 d, n*d f64 row-major, n f64 labels; all
// little-endian.
void write_dataset_binary(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset_binary(const std::filesystem::path& path);

// {"kind": "quadratic", "Q": [[...], ...], "c": [...]}
void write_quadratic_json(const std::filesystem::path& path, const QuadraticTest& q);
QuadraticTest read_quadratic_json(const std::filesystem::path& path);

// Objective from a data file, by extension: .csv and .bin give a regularized
// logistic problem with the given nu; .json gives a quadratic stub.
std::unique_ptr<Objective> load_objective(const std::filesystem::path& path, double reg_nu);

void write_gen_report(const std::filesystem::path& path, const DataGenConfig& config, const GenReport& report);

// Trace CSV columns: t,f,grad_norm,hstar_error,stepsize,skipped,backtracks
void write_trace_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& records);
std::vector<IterationRecord> read_trace_csv(const std::filesystem::path& path);

// Reads a whole text file.
std::string slurp(const std::filesystem::path& path);
// Writes text, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

// %.17g
std::string format_double(double v);

}  // namespace hessavg::io
