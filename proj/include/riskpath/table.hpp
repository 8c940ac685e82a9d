#pragma once

#include <riskpath/common.hpp>

#include <optional>
#include <string>
#include <vector>

namespace riskpath {

// Untyped columnar table straight out of an XPT or CSV file. Numeric cells
// are float-or-missing; character columns keep their raw (trimmed) strings.
struct RawColumn {
  std::string name;
  bool numeric = true;
  std::vector<std::optional<double>> values;  // numeric columns
  std::vector<std::string> text;              // character columns

  std::size_t size() const { return numeric ? values.size() : text.size(); }
};

struct RawTable {
  std::vector<RawColumn> columns;
  std::size_t n_rows = 0;

  const RawColumn* find(const std::string& name) const {
    for (const auto& c : columns)
      if (c.name == name) return &c;
    return nullptr;
  }

  void validate() const {
    for (const auto& c : columns)
      require(c.size() == n_rows, errc::io_error, "column " + c.name + " has ragged length");
    for (std::size_t i = 0; i < columns.size(); ++i)
      for (std::size_t j = i + 1; j < columns.size(); ++j)
        require(columns[i].name != columns[j].name, errc::io_error,
                "duplicate column name " + columns[i].name);
  }
};

}  // namespace riskpath
