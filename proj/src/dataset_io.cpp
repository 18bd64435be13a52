#include "lml/dataset_io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "lml/byteio.hpp"
#include "lml/errors.hpp"

namespace lml {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string trimmed(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& field, double& out) {
    const std::string t = trimmed(field);
    if (t.empty())
        return false;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    return ec == std::errc() && ptr == t.data() + t.size();
}

}  // namespace

Dataset load_csv(const std::string& path, const LabelColumn& label_column) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path);

    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> first_fields;
    if (!std::getline(in, line))
        throw ParseError(path + ": empty file");
    ++line_no;
    first_fields = split_fields(line);
    const std::size_t n_fields = first_fields.size();
    if (n_fields < 2)
        throw ParseError(path + ": line 1: need at least one feature and a label column");

    std::size_t label_idx;
    bool first_is_header;
    if (std::holds_alternative<std::string>(label_column)) {
        // Named label column implies the first line is a header.
        const std::string& want = std::get<std::string>(label_column);
        first_is_header = true;
        label_idx = n_fields;
        for (std::size_t j = 0; j < n_fields; ++j)
            if (trimmed(first_fields[j]) == want)
                label_idx = j;
        if (label_idx == n_fields)
            throw ParseError(path + ": header has no column named '" + want + "'");
    } else {
        label_idx = std::get<std::size_t>(label_column);
        if (label_idx >= n_fields)
            throw ParseError(path + ": label index " + std::to_string(label_idx) +
                             " out of range for " + std::to_string(n_fields) + " columns");
        // Header is optional: treat the first line as data iff every field parses.
        first_is_header = false;
        for (const auto& f : first_fields) {
            double v;
            if (!parse_double(f, v)) {
                first_is_header = true;
                break;
            }
        }
    }

    Dataset ds;
    ds.name = std::filesystem::path(path).stem().string();
    const std::size_t d = n_fields - 1;
    std::vector<double> values;
    std::vector<int> labels;

    auto consume_row = [&](const std::vector<std::string>& fields, std::size_t lineno) {
        if (fields.size() != n_fields)
            throw ParseError(path + ": line " + std::to_string(lineno) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(n_fields));
        for (std::size_t j = 0; j < n_fields; ++j) {
            double v;
            if (!parse_double(fields[j], v))
                throw ParseError(path + ": line " + std::to_string(lineno) + " column " +
                                 std::to_string(j + 1) + ": cannot parse '" + trimmed(fields[j]) +
                                 "' as a number");
            if (j == label_idx) {
                long lv = std::lround(v);
                if (static_cast<double>(lv) != v)
                    throw ParseError(path + ": line " + std::to_string(lineno) +
                                     ": label must be an integer, got '" + trimmed(fields[j]) + "'");
                labels.push_back(static_cast<int>(lv));
            } else {
                values.push_back(v);
            }
        }
    };

    if (!first_is_header)
        consume_row(first_fields, line_no);
    while (std::getline(in, line)) {
        ++line_no;
        if (trimmed(line).empty())
            continue;
        consume_row(split_fields(line), line_no);
    }

    ds.features = Matrix(labels.size(), d);
    ds.features.values() = std::move(values);
    ds.labels = std::move(labels);
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path, bool header) {
    std::ostringstream out;
    const std::size_t d = ds.feature_dim();
    if (header) {
        for (std::size_t j = 0; j < d; ++j)
            out << "f" << j << ",";
        out << "label\n";
    }
    char buf[32];
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double* row = ds.features.row_ptr(i);
        for (std::size_t j = 0; j < d; ++j) {
            // 9 significant digits: full float precision for round-trips.
            std::snprintf(buf, sizeof buf, "%.9g", row[j]);
            out << buf << ",";
        }
        out << ds.labels[i] << "\n";
    }
    write_file_atomically(path, out.str());
}

namespace {
constexpr char kDatasetMagic[4] = {'L', 'M', 'L', 'D'};
constexpr std::uint8_t kDatasetVersion = 1;
}  // namespace

Dataset load_lmld(const std::string& path) {
    ByteReader reader(read_file_bytes(path));
    std::string magic = reader.bytes(4);
    if (magic != std::string(kDatasetMagic, 4))
        throw FormatError(path + ": bad magic '" + magic + "', expected 'LMLD'");
    const std::uint8_t version = reader.u8();
    if (version != kDatasetVersion)
        throw FormatError(path + ": unsupported version " + std::to_string(version));
    const std::uint32_t header_len = reader.u32();
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(reader.bytes(header_len));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": bad JSON header: " + e.what());
    }
    const std::size_t n = header.at("n").get<std::size_t>();
    const std::size_t d = header.at("d").get<std::size_t>();

    Dataset ds;
    ds.name = header.value("name", std::string{});
    ds.features = Matrix(n, d);
    double* out = ds.features.data();
    if (reader.remaining() < n * d * 4 + n)
        throw FormatError(path + ": truncated payload");
    for (std::size_t i = 0; i < n * d; ++i)
        out[i] = static_cast<double>(reader.f32());
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        ds.labels[i] = reader.i8();
    return ds;
}

void save_lmld(const Dataset& ds, const std::string& path, int label_sentinel) {
    nlohmann::json header = {
        {"n", ds.size()},
        {"d", ds.feature_dim()},
        {"label_sentinel", label_sentinel},
        {"name", ds.name},
    };
    const std::string header_text = header.dump();

    ByteWriter w;
    w.bytes(std::string(kDatasetMagic, 4));
    w.u8(kDatasetVersion);
    w.u32(static_cast<std::uint32_t>(header_text.size()));
    w.bytes(header_text);
    for (double v : ds.features.values())
        w.f32(static_cast<float>(v));
    for (int label : ds.labels) {
        if (label < -128 || label > 127)
            throw PreconditionError("save_lmld: label " + std::to_string(label) +
                                    " does not fit in an 8-bit field");
        w.i8(static_cast<std::int8_t>(label));
    }
    write_file_atomically(path, w.buffer());
}

}  // namespace lml
