#pragma once

#include "fraudrl/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fraudrl {

// Column-major table as loaded from CSV: numeric columns hold doubles (NaN
// for blank cells), categorical columns hold raw strings.
struct RawTable {
  std::vector<std::string> column_names;
  std::vector<bool> is_categorical;
  std::vector<std::vector<double>> numeric;           // empty vec for categorical cols
  std::vector<std::vector<std::string>> categorical;  // empty vec for numeric cols
  std::int64_t row_count = 0;
};

struct RowError {
  std::int64_t row = 0;  // 1-based data row (header not counted)
  std::string column;
  std::string message;
};

struct LoadResult {
  RawTable table;  // sorted ascending by the time column, stable on ties
  std::vector<RowError> rejected;  // rows dropped for unparseable numeric cells
};

struct CsvSpec {
  std::string label_column = "label";
  std::string amount_column = "amount";
  std::string time_column = "time";
  // Columns to treat as categorical (target-encoded later). Everything else
  // must parse as a number.
  std::vector<std::string> categorical_columns;
};

// Throws IngestError on structural problems (missing file, missing columns,
// a label that is not 0/1); collects per-row errors for unparseable numeric
// cells instead of failing. Blank numeric cells become NaN for imputation,
// except a blank time cell, which rejects the row (it cannot be ordered).
LoadResult load_csv(const std::string& path, const CsvSpec& spec);

struct SynthConfig {
  std::int64_t rows = 10000;
  int feature_count = 8;
  double fraud_rate = 0.02;  // in (0, 1)
  // Fraud features are drawn around +separation (genuine around 0), both
  // with unit standard deviation.
  double separation = 3.0;
  double amount_genuine_mean = 4.0;  // log-normal location per class
  double amount_fraud_mean = 5.0;
  double amount_sigma = 1.0;
  // Regime switch: from this row on, the fraud cluster mean moves by
  // drift_offset. 0 disables the switch.
  std::int64_t drift_index = 0;
  double drift_offset = 0.0;
};

// Time-ordered synthetic stream; columns: time, f0..f{k-1}, amount, label.
RawTable synth_generate(const SynthConfig& config, std::uint64_t seed);

void write_csv(const std::string& path, const RawTable& table);

struct SplitIndices {
  std::int64_t train_end = 0;  // rows [0, train_end)
  std::int64_t val_end = 0;    // rows [train_end, val_end); test = rest
};

// Time-ordered 70/10/20 split: floor for train and validation, remainder to
// test. Throws on fewer than 10 rows.
SplitIndices split_indices(std::int64_t row_count);

// Per-feature min/max learned on the training rows. apply maps each value by
// (v - min)/(max - min) WITHOUT clamping, so out-of-range test values land
// outside [0, 1]. Constant features map to 0.
struct ScalerParams {
  std::vector<double> min;
  std::vector<double> max;
};

ScalerParams fit_scaler(const Matrix& train);
Matrix apply_scaler(const ScalerParams& params, const Matrix& data);

// Smoothed mean-label encoding for one categorical column:
// value -> (count * mean + smoothing * global) / (count + smoothing).
struct TargetEncoder {
  std::map<std::string, double> encoding;
  double global_mean = 0.0;
  double smoothing = 20.0;

  double encode(const std::string& value) const;  // unseen -> global_mean
};

TargetEncoder fit_target_encoder(const std::vector<std::string>& values,
                                 const std::vector<double>& labels, double smoothing);

struct PrepareConfig {
  CsvSpec csv;
  double encoder_smoothing = 20.0;
};

// Fully prepared splits: features are encoded/imputed/scaled, amounts stay
// raw for the monetary reward.
struct PreparedData {
  TransactionList train;
  TransactionList val;
  TransactionList test;
  std::vector<std::string> feature_names;
  ScalerParams scaler;
  std::vector<TargetEncoder> encoders;  // one per categorical column, in order
  std::vector<double> medians;          // train-split imputation values
  std::int64_t train_fraud = 0;
  std::int64_t train_genuine = 0;
};

// Split first, then fit medians/encoders/scaler on the training rows only
// and apply to all three splits. Features are all non-label columns in table
// order (the scaled amount included; its raw copy is kept per transaction).
PreparedData prepare(const RawTable& table, const PrepareConfig& config);

}  // namespace fraudrl
