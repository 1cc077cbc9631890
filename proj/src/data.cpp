#include "discount/data.hpp"

#include "discount/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace discount {

const Column* Table::find(const std::string& name) const {
  for (const auto& col : columns) {
    if (col.name == name) return &col;
  }
  return nullptr;
}

namespace {

bool parse_double(const std::string& cell, double& out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  const char* tail = end;
  while (tail > begin && (tail[-1] == ' ' || tail[-1] == '\t')) --tail;
  if (begin == tail) return false;
  const auto result = std::from_chars(begin, tail, out);
  return result.ec == std::errc{} && result.ptr == tail;
}

/// Split one CSV record; `pos` advances past the record. Quoted fields may
/// contain commas, doubled quotes, and newlines.
std::vector<std::string> next_record(const std::string& text, std::size_t& pos,
                                     std::size_t row_for_errors) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  while (pos < text.size()) {
    const char c = text[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field.push_back('"');
          ++pos;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      ++pos;
      continue;
    }
    if (c == '"' && field.empty()) {
      in_quotes = true;
      any = true;
      ++pos;
      continue;
    }
    if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      any = true;
      ++pos;
      continue;
    }
    if (c == '\n' || c == '\r') {
      ++pos;
      if (c == '\r' && pos < text.size() && text[pos] == '\n') ++pos;
      break;
    }
    field.push_back(c);
    any = true;
    ++pos;
  }
  if (in_quotes) {
    throw ParseError("unterminated quoted field", row_for_errors,
                     fields.size() + 1);
  }
  if (any || !fields.empty() || !field.empty()) {
    fields.push_back(std::move(field));
  }
  return fields;
}

bool contains(const std::vector<std::string>& names, const std::string& name) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

}  // namespace

Table parse_csv(std::istream& in, const std::string& origin,
                const CsvHints& hints) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  std::size_t pos = 0;
  std::size_t row = 1;
  const auto header = next_record(text, pos, row);
  if (header.empty()) {
    throw DiscountError("csv file has no header row: " + origin);
  }

  std::vector<std::vector<std::string>> cells(header.size());
  while (pos < text.size()) {
    ++row;
    auto record = next_record(text, pos, row);
    if (record.empty()) continue;  // trailing blank line
    if (record.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) +
                           " fields, found " + std::to_string(record.size()),
                       row, record.size());
    }
    for (std::size_t c = 0; c < record.size(); ++c) {
      cells[c].push_back(std::move(record[c]));
    }
  }
  const std::size_t n = cells.empty() ? 0 : cells[0].size();
  if (n == 0) throw DiscountError("csv file has no data rows: " + origin);

  Table table;
  table.rows = n;
  for (std::size_t c = 0; c < header.size(); ++c) {
    Column col;
    col.name = header[c];
    const bool forced_numeric = contains(hints.numeric, col.name);
    const bool forced_categorical = contains(hints.categorical, col.name);

    bool numeric = !forced_categorical;
    std::vector<double> parsed(n);
    if (numeric) {
      for (std::size_t r = 0; r < n; ++r) {
        if (!parse_double(cells[c][r], parsed[r])) {
          if (forced_numeric) {
            throw ParseError("non-numeric value '" + cells[c][r] +
                                 "' in numeric column '" + col.name + "'",
                             r + 2, c + 1);
          }
          numeric = false;
          break;
        }
      }
    }
    col.numeric = numeric;
    if (numeric) {
      col.values = std::move(parsed);
    } else {
      col.labels = std::move(cells[c]);
    }
    table.columns.push_back(std::move(col));
  }
  return table;
}

Table load_csv(const std::string& path, const CsvHints& hints) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DiscountError("cannot open csv file: " + path);
  return parse_csv(in, path, hints);
}

// ---------------------------------------------------------------------------
// Preprocessing

Matrix Preprocessor::transform(const Table& table) const {
  Matrix out(static_cast<Index>(table.rows), encoded_dim());
  Index offset = 0;
  for (const auto& [is_numeric, idx] : layout) {
    if (is_numeric) {
      const auto& spec = numeric_cols[idx];
      const Column* col = table.find(spec.name);
      if (col == nullptr || !col->numeric) {
        throw InvalidDataset("missing numeric column: " + spec.name);
      }
      for (std::size_t r = 0; r < table.rows; ++r) {
        out(static_cast<Index>(r), offset) = (col->values[r] - spec.mean) / spec.sd;
      }
      ++offset;
    } else {
      const auto& spec = categorical_cols[idx];
      const Column* col = table.find(spec.name);
      if (col == nullptr || col->numeric) {
        throw InvalidDataset("missing categorical column: " + spec.name);
      }
      for (std::size_t r = 0; r < table.rows; ++r) {
        const auto it = std::find(spec.categories.begin(),
                                  spec.categories.end(), col->labels[r]);
        if (it == spec.categories.end()) {
          throw InvalidDataset("unseen category '" + col->labels[r] +
                               "' in column '" + spec.name + "'");
        }
        for (std::size_t k = 0; k < spec.categories.size(); ++k) {
          out(static_cast<Index>(r),
              offset + static_cast<Index>(k)) =
              (static_cast<std::size_t>(it - spec.categories.begin()) == k)
                  ? 1.0
                  : 0.0;
        }
      }
      offset += static_cast<Index>(spec.categories.size());
    }
  }
  return out;
}

Table Preprocessor::inverse_transform(const Matrix& encoded) const {
  if (encoded.cols() != encoded_dim()) {
    throw std::invalid_argument("inverse_transform dimension mismatch");
  }
  Table table;
  table.rows = static_cast<std::size_t>(encoded.rows());
  Index offset = 0;
  for (const auto& [is_numeric, idx] : layout) {
    Column col;
    if (is_numeric) {
      const auto& spec = numeric_cols[idx];
      col.name = spec.name;
      col.numeric = true;
      col.values.resize(table.rows);
      for (std::size_t r = 0; r < table.rows; ++r) {
        col.values[r] = encoded(static_cast<Index>(r), offset) * spec.sd + spec.mean;
      }
      ++offset;
    } else {
      const auto& spec = categorical_cols[idx];
      col.name = spec.name;
      col.numeric = false;
      col.labels.resize(table.rows);
      const auto width = static_cast<Index>(spec.categories.size());
      for (std::size_t r = 0; r < table.rows; ++r) {
        Index best = 0;
        encoded.row(static_cast<Index>(r)).segment(offset, width).maxCoeff(&best);
        col.labels[r] = spec.categories[static_cast<std::size_t>(best)];
      }
      offset += width;
    }
    table.columns.push_back(std::move(col));
  }
  return table;
}

namespace {

Vector extract_binary_labels(const Column& col) {
  Vector labels(static_cast<Index>(col.numeric ? col.values.size()
                                               : col.labels.size()));
  if (col.numeric) {
    std::set<double> distinct(col.values.begin(), col.values.end());
    if (distinct.size() != 2) {
      throw InvalidDataset("label column must hold exactly two classes, found " +
                           std::to_string(distinct.size()));
    }
    const double low = *distinct.begin();
    for (std::size_t r = 0; r < col.values.size(); ++r) {
      labels[static_cast<Index>(r)] = (col.values[r] == low) ? 0.0 : 1.0;
    }
  } else {
    std::set<std::string> distinct(col.labels.begin(), col.labels.end());
    if (distinct.size() != 2) {
      throw InvalidDataset("label column must hold exactly two classes, found " +
                           std::to_string(distinct.size()));
    }
    const std::string low = *distinct.begin();
    for (std::size_t r = 0; r < col.labels.size(); ++r) {
      labels[static_cast<Index>(r)] = (col.labels[r] == low) ? 0.0 : 1.0;
    }
  }
  return labels;
}

}  // namespace

SplitResult preprocess(const Table& table, const std::string& label_column,
                       std::uint64_t seed, double train_ratio) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw std::invalid_argument("train ratio must lie in (0, 1)");
  }
  const Column* label_col = table.find(label_column);
  if (label_col == nullptr) {
    throw InvalidDataset("label column not found: " + label_column);
  }
  const Vector all_labels = extract_binary_labels(*label_col);

  const auto n = table.rows;
  if (n < 2) throw InvalidDataset("need at least two rows to split");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  auto n_train = static_cast<std::size_t>(
      std::llround(train_ratio * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  const std::vector<std::size_t> train_rows(order.begin(),
                                            order.begin() + static_cast<std::ptrdiff_t>(n_train));
  const std::vector<std::size_t> test_rows(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                                           order.end());

  // Fit the preprocessor: category tables over the full table, moments over
  // the training rows only.
  Preprocessor prep;
  int cat_index = 0;
  for (const auto& col : table.columns) {
    if (col.name == label_column) continue;
    if (col.numeric) {
      double mean = 0.0;
      for (std::size_t r : train_rows) mean += col.values[r];
      mean /= static_cast<double>(train_rows.size());
      double var = 0.0;
      for (std::size_t r : train_rows) {
        const double dev = col.values[r] - mean;
        var += dev * dev;
      }
      var /= static_cast<double>(train_rows.size());
      double sd = std::sqrt(var);
      if (sd < 1e-12) sd = 1.0;  // constant column: pass through centered
      prep.layout.emplace_back(true, prep.numeric_cols.size());
      prep.numeric_cols.push_back({col.name, mean, sd});
      prep.encoded_names.push_back(col.name);
      prep.one_hot_group.push_back(-1);
    } else {
      std::set<std::string> distinct(col.labels.begin(), col.labels.end());
      Preprocessor::CategoricalCol spec{col.name,
                                        {distinct.begin(), distinct.end()}};
      prep.layout.emplace_back(false, prep.categorical_cols.size());
      for (const auto& category : spec.categories) {
        prep.encoded_names.push_back(col.name + "=" + category);
        prep.one_hot_group.push_back(cat_index);
      }
      prep.categorical_cols.push_back(std::move(spec));
      ++cat_index;
    }
  }
  if (prep.encoded_names.empty()) {
    throw InvalidDataset("no feature columns besides the label");
  }

  auto subset = [&](const std::vector<std::size_t>& rows) {
    Table sub;
    sub.rows = rows.size();
    for (const auto& col : table.columns) {
      if (col.name == label_column) continue;
      Column out;
      out.name = col.name;
      out.numeric = col.numeric;
      for (std::size_t r : rows) {
        if (col.numeric) {
          out.values.push_back(col.values[r]);
        } else {
          out.labels.push_back(col.labels[r]);
        }
      }
      sub.columns.push_back(std::move(out));
    }
    return sub;
  };

  auto make_dataset = [&](const std::vector<std::size_t>& rows) {
    Dataset ds;
    ds.x = EmpiricalSample(prep.transform(subset(rows)), prep.encoded_names,
                           prep.one_hot_group);
    ds.labels.resize(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ds.labels[static_cast<Index>(i)] = all_labels[static_cast<Index>(rows[i])];
    }
    return ds;
  };

  SplitResult result;
  result.train = make_dataset(train_rows);
  result.test = make_dataset(test_rows);
  result.preprocessor = std::move(prep);
  return result;
}

std::pair<EmpiricalSample, Vector> make_synthetic_blobs(Index n, Index d,
                                                        double separation,
                                                        std::uint64_t seed) {
  if (n < 2 || d < 1) {
    throw std::invalid_argument("blobs require n >= 2 and d >= 1");
  }
  Rng rng(seed);
  // Cluster centers sit at +-separation/2 along the first axis.
  const double offset = separation / 2.0;
  Matrix points(n, d);
  Vector labels(n);
  for (Index i = 0; i < n; ++i) {
    const double label = static_cast<double>(i % 2);
    for (Index j = 0; j < d; ++j) points(i, j) = rng.normal();
    points(i, 0) += (label > 0.5) ? offset : -offset;
    labels[i] = label;
  }
  return {EmpiricalSample(std::move(points)), std::move(labels)};
}

}  // namespace discount
