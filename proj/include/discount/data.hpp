#pragma once

#include "discount/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace discount {

/// CSV parse failure with 1-based row/column location (row 1 = header).
struct ParseError : DiscountError {
  ParseError(const std::string& msg, std::size_t row, std::size_t col)
      : DiscountError(msg + " at row " + std::to_string(row) + ", column " +
                      std::to_string(col)),
        row(row),
        column(col) {}
  std::size_t row;
  std::size_t column;
};

struct InvalidDataset : DiscountError {
  using DiscountError::DiscountError;
};

/// A typed column: either fully numeric or categorical strings.
struct Column {
  std::string name;
  bool numeric = true;
  std::vector<double> values;       // numeric columns
  std::vector<std::string> labels;  // categorical columns
};

struct Table {
  std::vector<Column> columns;
  std::size_t rows = 0;

  const Column* find(const std::string& name) const;
};

/// Optional per-column type declarations. Columns in `numeric` must parse as
/// reals (a bad cell is a ParseError); columns in `categorical` are kept as
/// strings; everything else is inferred.
struct CsvHints {
  std::vector<std::string> numeric;
  std::vector<std::string> categorical;
};

/// Parse an RFC-4180 style CSV file with a header row.
Table load_csv(const std::string& path, const CsvHints& hints = {});
Table parse_csv(std::istream& in, const std::string& origin,
                const CsvHints& hints = {});

/// Feature scaling and encoding fitted on the training split: numeric
/// columns are standardized to mean 0 / sd 1, categoricals are one-hot
/// encoded with category tables frozen at fit time.
struct Preprocessor {
  struct NumericCol {
    std::string name;
    double mean = 0.0;
    double sd = 1.0;
  };
  struct CategoricalCol {
    std::string name;
    std::vector<std::string> categories;
  };

  std::vector<NumericCol> numeric_cols;
  std::vector<CategoricalCol> categorical_cols;
  /// Original feature order: (is_numeric, index into the vector above).
  std::vector<std::pair<bool, std::size_t>> layout;

  std::vector<std::string> encoded_names;  // output column names
  std::vector<int> one_hot_group;          // -1 numeric, else categorical idx

  Index encoded_dim() const { return static_cast<Index>(encoded_names.size()); }

  /// Encode + standardize the fitted feature columns of a raw table.
  Matrix transform(const Table& table) const;

  /// Undo standardization and decode one-hot groups by argmax.
  Table inverse_transform(const Matrix& encoded) const;
};

struct Dataset {
  EmpiricalSample x;
  Vector labels;
};

struct SplitResult {
  Dataset train;
  Dataset test;
  Preprocessor preprocessor;
};

/// Deterministic shuffled split (train_ratio to train), one-hot encoding,
/// and standardization fitted on the training split only. The label column
/// must hold exactly two classes (two numeric values or two categories).
SplitResult preprocess(const Table& table, const std::string& label_column,
                       std::uint64_t seed, double train_ratio = 0.8);

/// Two Gaussian clusters with centers `separation` apart and unit spread,
/// balanced 0/1 labels, deterministic given the seed.
std::pair<EmpiricalSample, Vector> make_synthetic_blobs(Index n, Index d,
                                                        double separation,
                                                        std::uint64_t seed);

}  // namespace discount
