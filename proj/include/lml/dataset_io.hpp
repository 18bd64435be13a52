#pragma once

#include <string>
#include <variant>

#include "lml/dataset.hpp"

namespace lml {

// Label column selected either by 0-based index or by header name (name
// requires a header line).
using LabelColumn = std::variant<std::size_t, std::string>;

// Plain numeric CSV, optional header line, UTF-8, no quoting.
Dataset load_csv(const std::string& path, const LabelColumn& label_column);
void save_csv(const Dataset& ds, const std::string& path, bool header = true);

// LMLD container: magic "LMLD", version 1, u32 LE header length, JSON header
// {n, d, label_sentinel, name}, n*d little-endian f32 features, n i8 labels.
Dataset load_lmld(const std::string& path);
void save_lmld(const Dataset& ds, const std::string& path,
               int label_sentinel = kUnlabeledSentinel);

}  // namespace lml
