#include "fraudrl/data.hpp"

#include "fraudrl/errors.hpp"
#include "fraudrl/metrics.hpp"
#include "fraudrl/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>

namespace fraudrl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// One CSV record; handles quoted fields with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

bool parse_double(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc{} && res.ptr == end;
}

void sort_by_time(RawTable& table, std::size_t time_idx) {
  const auto n = static_cast<std::size_t>(table.row_count);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::vector<double>& time = table.numeric[time_idx];
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return time[a] < time[b]; });
  for (std::size_t c = 0; c < table.column_names.size(); ++c) {
    if (table.is_categorical[c]) {
      std::vector<std::string> next(n);
      for (std::size_t i = 0; i < n; ++i) next[i] = std::move(table.categorical[c][order[i]]);
      table.categorical[c] = std::move(next);
    } else {
      std::vector<double> next(n);
      for (std::size_t i = 0; i < n; ++i) next[i] = table.numeric[c][order[i]];
      table.numeric[c] = std::move(next);
    }
  }
}

}  // namespace

LoadResult load_csv(const std::string& path, const CsvSpec& spec) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw IngestError("'" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  LoadResult result;
  RawTable& table = result.table;
  table.column_names = split_csv_line(line);
  const std::size_t width = table.column_names.size();

  auto col_index = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it =
        std::find(table.column_names.begin(), table.column_names.end(), name);
    if (it == table.column_names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - table.column_names.begin());
  };
  const auto require_col = [&](const std::string& name) {
    const auto idx = col_index(name);
    if (!idx) throw IngestError("'" + path + "' has no '" + name + "' column");
    return *idx;
  };
  const std::size_t label_idx = require_col(spec.label_column);
  const std::size_t time_idx = require_col(spec.time_column);
  require_col(spec.amount_column);
  for (const std::string& name : spec.categorical_columns) {
    require_col(name);
    if (name == spec.label_column || name == spec.amount_column ||
        name == spec.time_column) {
      throw ConfigError("column '" + name + "' cannot be categorical");
    }
  }

  table.is_categorical.assign(width, false);
  for (const std::string& name : spec.categorical_columns) {
    table.is_categorical[*col_index(name)] = true;
  }
  table.numeric.resize(width);
  table.categorical.resize(width);

  std::int64_t data_row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++data_row;
    if (line.empty()) continue;  // skip stray blank lines
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != width) {
      result.rejected.push_back(
          {data_row, "",
           "expected " + std::to_string(width) + " fields, found " +
               std::to_string(fields.size())});
      continue;
    }
    // A broken label is a structural problem, not a droppable row.
    double label_value = kNaN;
    if (!parse_double(fields[label_idx], label_value) ||
        (label_value != 0.0 && label_value != 1.0)) {
      throw IngestError("'" + path + "' row " + std::to_string(data_row) +
                        ": label must be 0 or 1");
    }
    // Parse the whole row before committing any of it.
    std::vector<double> values(width, kNaN);
    values[label_idx] = label_value;
    std::optional<RowError> bad;
    if (fields[time_idx].empty()) {
      bad = RowError{data_row, table.column_names[time_idx],
                     "blank time value; row cannot be ordered"};
    }
    for (std::size_t c = 0; c < width && !bad; ++c) {
      if (table.is_categorical[c] || c == label_idx) continue;
      if (fields[c].empty()) continue;  // missing value, imputed later
      if (!parse_double(fields[c], values[c])) {
        bad = RowError{data_row, table.column_names[c],
                       "cannot parse '" + fields[c] + "' as a number"};
      }
    }
    if (bad) {
      result.rejected.push_back(std::move(*bad));
      continue;
    }
    for (std::size_t c = 0; c < width; ++c) {
      if (table.is_categorical[c]) {
        table.categorical[c].push_back(fields[c]);
      } else {
        table.numeric[c].push_back(values[c]);
      }
    }
    ++table.row_count;
  }
  if (table.row_count == 0) throw IngestError("'" + path + "' has no data rows");
  sort_by_time(table, time_idx);
  return result;
}

RawTable synth_generate(const SynthConfig& config, std::uint64_t seed) {
  if (config.rows < 1) throw ConfigError("synth: rows must be >= 1");
  if (config.feature_count < 1) throw ConfigError("synth: feature_count must be >= 1");
  if (config.fraud_rate <= 0.0 || config.fraud_rate >= 1.0) {
    throw ConfigError("synth: fraud_rate must be in (0, 1)");
  }
  if (config.amount_sigma < 0.0) throw ConfigError("synth: amount_sigma must be >= 0");
  if (config.drift_index < 0) throw ConfigError("synth: drift_index must be >= 0");

  RawTable table;
  table.column_names.push_back("time");
  for (int i = 0; i < config.feature_count; ++i) {
    table.column_names.push_back("f" + std::to_string(i));
  }
  table.column_names.push_back("amount");
  table.column_names.push_back("label");
  const std::size_t width = table.column_names.size();
  table.is_categorical.assign(width, false);
  table.numeric.resize(width);
  table.categorical.resize(width);
  const std::size_t amount_idx = width - 2;
  const std::size_t label_idx = width - 1;

  Rng rng(seed);
  for (std::int64_t row = 0; row < config.rows; ++row) {
    const int label = rng.bernoulli(config.fraud_rate) ? 1 : 0;
    double fraud_mean = config.separation;
    if (config.drift_index > 0 && row >= config.drift_index) {
      fraud_mean += config.drift_offset;
    }
    table.numeric[0].push_back(static_cast<double>(row));
    for (int i = 0; i < config.feature_count; ++i) {
      const double mean = label == 1 ? fraud_mean : 0.0;
      table.numeric[1 + static_cast<std::size_t>(i)].push_back(rng.normal(mean, 1.0));
    }
    const double loc = label == 1 ? config.amount_fraud_mean : config.amount_genuine_mean;
    table.numeric[amount_idx].push_back(std::exp(rng.normal(loc, config.amount_sigma)));
    table.numeric[label_idx].push_back(static_cast<double>(label));
  }
  table.row_count = config.rows;
  return table;
}

void write_csv(const std::string& path, const RawTable& table) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot open '" + path + "' for writing");
  for (std::size_t c = 0; c < table.column_names.size(); ++c) {
    if (c > 0) out << ',';
    out << table.column_names[c];
  }
  out << '\n';
  for (std::int64_t r = 0; r < table.row_count; ++r) {
    for (std::size_t c = 0; c < table.column_names.size(); ++c) {
      if (c > 0) out << ',';
      if (table.is_categorical[c]) {
        out << table.categorical[c][static_cast<std::size_t>(r)];
      } else {
        const double v = table.numeric[c][static_cast<std::size_t>(r)];
        if (!std::isnan(v)) out << format_double(v);
      }
    }
    out << '\n';
  }
  if (!out) throw IngestError("write to '" + path + "' failed");
}

SplitIndices split_indices(std::int64_t row_count) {
  if (row_count < 10) {
    throw InputError("need at least 10 rows to form train/val/test splits");
  }
  SplitIndices s;
  s.train_end = row_count * 7 / 10;
  s.val_end = s.train_end + row_count / 10;
  return s;
}

ScalerParams fit_scaler(const Matrix& train) {
  if (train.rows() == 0) throw InputError("scaler: no training rows");
  ScalerParams p;
  p.min.resize(static_cast<std::size_t>(train.cols()));
  p.max.resize(static_cast<std::size_t>(train.cols()));
  for (Eigen::Index c = 0; c < train.cols(); ++c) {
    p.min[static_cast<std::size_t>(c)] = train.col(c).minCoeff();
    p.max[static_cast<std::size_t>(c)] = train.col(c).maxCoeff();
  }
  return p;
}

Matrix apply_scaler(const ScalerParams& params, const Matrix& data) {
  if (static_cast<std::size_t>(data.cols()) != params.min.size()) {
    throw ShapeError("scaler: column count does not match fitted parameters");
  }
  Matrix out(data.rows(), data.cols());
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    const double lo = params.min[static_cast<std::size_t>(c)];
    const double hi = params.max[static_cast<std::size_t>(c)];
    if (hi == lo) {
      out.col(c).setZero();
    } else {
      out.col(c) = (data.col(c).array() - lo) / (hi - lo);
    }
  }
  return out;
}

double TargetEncoder::encode(const std::string& value) const {
  const auto it = encoding.find(value);
  return it == encoding.end() ? global_mean : it->second;
}

TargetEncoder fit_target_encoder(const std::vector<std::string>& values,
                                 const std::vector<double>& labels, double smoothing) {
  if (values.size() != labels.size()) {
    throw ShapeError("target encoder: values and labels lengths differ");
  }
  if (values.empty()) throw InputError("target encoder: no rows to fit");
  if (smoothing < 0.0) throw ConfigError("target encoder: smoothing must be >= 0");

  TargetEncoder enc;
  enc.smoothing = smoothing;
  double total = 0.0;
  std::map<std::string, std::pair<double, double>> stats;  // value -> (count, label sum)
  for (std::size_t i = 0; i < values.size(); ++i) {
    total += labels[i];
    auto& [count, sum] = stats[values[i]];
    count += 1.0;
    sum += labels[i];
  }
  enc.global_mean = total / static_cast<double>(values.size());
  for (const auto& [value, cs] : stats) {
    const auto& [count, sum] = cs;
    enc.encoding[value] = (sum + smoothing * enc.global_mean) / (count + smoothing);
  }
  return enc;
}

namespace {

double median_of(std::vector<double> values) {
  std::erase_if(values, [](double v) { return std::isnan(v); });
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                   values.end());
  const double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  const double lo =
      *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace

PreparedData prepare(const RawTable& table, const PrepareConfig& config) {
  const auto find_col = [&](const std::string& name) {
    const auto it =
        std::find(table.column_names.begin(), table.column_names.end(), name);
    if (it == table.column_names.end()) {
      throw IngestError("table has no '" + name + "' column");
    }
    return static_cast<std::size_t>(it - table.column_names.begin());
  };
  const std::size_t label_idx = find_col(config.csv.label_column);
  const std::size_t amount_idx = find_col(config.csv.amount_column);
  if (table.is_categorical[label_idx] || table.is_categorical[amount_idx]) {
    throw IngestError("label and amount columns must be numeric");
  }
  const std::size_t width = table.column_names.size();
  const std::int64_t n = table.row_count;
  const SplitIndices splits = split_indices(n);

  PreparedData out;
  // Feature columns: everything but the label, in table order.
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < width; ++c) {
    if (c == label_idx) continue;
    feature_cols.push_back(c);
    out.feature_names.push_back(table.column_names[c]);
  }
  const std::vector<double>& labels = table.numeric[label_idx];

  // Materialise numeric feature columns: target-encode categoricals, then
  // impute blanks with the training-split median.
  const std::vector<double> train_labels(labels.begin(), labels.begin() + splits.train_end);
  std::vector<std::vector<double>> columns(feature_cols.size());
  for (std::size_t f = 0; f < feature_cols.size(); ++f) {
    const std::size_t c = feature_cols[f];
    if (table.is_categorical[c]) {
      const std::vector<std::string>& raw = table.categorical[c];
      TargetEncoder enc = fit_target_encoder(
          std::vector<std::string>(raw.begin(), raw.begin() + splits.train_end),
          train_labels, config.encoder_smoothing);
      columns[f].reserve(raw.size());
      for (const std::string& v : raw) columns[f].push_back(enc.encode(v));
      out.encoders.push_back(std::move(enc));
    } else {
      columns[f] = table.numeric[c];
    }
  }
  std::vector<double> raw_amounts = table.numeric[amount_idx];
  out.medians.assign(feature_cols.size(), 0.0);
  for (std::size_t f = 0; f < feature_cols.size(); ++f) {
    std::vector<double>& col = columns[f];
    const double med =
        median_of(std::vector<double>(col.begin(), col.begin() + splits.train_end));
    out.medians[f] = med;
    for (double& v : col) {
      if (std::isnan(v)) v = med;
    }
    if (feature_cols[f] == amount_idx) {
      for (double& a : raw_amounts) {
        if (std::isnan(a)) a = med;
      }
    }
  }

  // Assemble the full feature matrix and min-max scale on the train block.
  Matrix features(n, static_cast<Eigen::Index>(feature_cols.size()));
  for (std::size_t f = 0; f < feature_cols.size(); ++f) {
    for (std::int64_t r = 0; r < n; ++r) {
      features(r, static_cast<Eigen::Index>(f)) = columns[f][static_cast<std::size_t>(r)];
    }
  }
  out.scaler = fit_scaler(features.topRows(splits.train_end));
  const Matrix scaled = apply_scaler(out.scaler, features);

  const auto emit = [&](std::int64_t begin, std::int64_t end, TransactionList& dest) {
    dest.reserve(static_cast<std::size_t>(end - begin));
    for (std::int64_t r = begin; r < end; ++r) {
      Transaction t;
      t.index = r;
      t.features = scaled.row(r).transpose();
      t.amount = raw_amounts[static_cast<std::size_t>(r)];
      t.label = labels[static_cast<std::size_t>(r)] == 1.0 ? 1 : 0;
      dest.push_back(std::move(t));
    }
  };
  emit(0, splits.train_end, out.train);
  emit(splits.train_end, splits.val_end, out.val);
  emit(splits.val_end, n, out.test);

  for (const Transaction& t : out.train) {
    (t.label == 1 ? out.train_fraud : out.train_genuine) += 1;
  }
  return out;
}

}  // namespace fraudrl
