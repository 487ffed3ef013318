#pragma once

// Text formats.
//
// LIBSVM data:   <label> <idx>:<val> ...   (1-based ascending indices; labels
//                +1/-1, or 1/0 with 0 read as -1; the label is omitted in
//                unlabeled files)
// Knowledge:     "m k1 k2" header, then k1 rows "<idx>:<val> ... <d_i>", then
//                k2 rows "<idx>:<val> ... <g_i>" (0-based indices)
// Model:         bias on the first line, then "<idx>:<weight>" per support
//                feature in ascending order (0-based)
// Key-value:     "key=value" per line, used for metrics and generator metadata
//
// Doubles are written in shortest round-trip form, so every writer/reader
// pair reproduces its input bit for bit. Blank lines and lines starting with
// '#' are ignored by the data and knowledge readers, so an unlabeled sample
// with no stored entries does not survive a round trip.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hipad/data.hpp"
#include "hipad/hipad.hpp"
#include "hipad/synthetic.hpp"

namespace hipad {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);
/// Whole-token parse; throws ParseError (line 0) on trailing junk or overflow.
double parse_double(std::string_view text);

struct LibsvmReadOptions {
    /// Feature count; defaults to the largest index seen. Indices beyond it are an error.
    std::optional<std::size_t> features;
    /// When unset the reader detects labels from the first data line and then
    /// requires every line to agree.
    std::optional<bool> labeled;
};

DataMatrix parse_libsvm(std::istream& in, const LibsvmReadOptions& options = {});
DataMatrix read_libsvm(const std::filesystem::path& path, const LibsvmReadOptions& options = {});
void write_libsvm(std::ostream& out, const DataMatrix& data);
void write_libsvm(const std::filesystem::path& path, const DataMatrix& data);

KnowledgeSet parse_knowledge(std::istream& in);
KnowledgeSet read_knowledge(const std::filesystem::path& path);
void write_knowledge(std::ostream& out, const KnowledgeSet& knowledge);
void write_knowledge(const std::filesystem::path& path, const KnowledgeSet& knowledge);

/// Only support, weights and bias are stored; the loaded model has origin admm_only
/// and no phase statistics.
SvmModel parse_model(std::istream& in);
SvmModel read_model(const std::filesystem::path& path);
void write_model(std::ostream& out, const SvmModel& model);
void write_model(const std::filesystem::path& path, const SvmModel& model);

/// Ordered key-value records. Keys are non-empty and free of '=', tabs and
/// newlines; values are free of tabs and newlines.
class KeyValues {
public:
    void set(std::string key, std::string value);
    void set(std::string key, double value) { set(std::move(key), format_double(value)); }
    void set_int(std::string key, long long value) { set(std::move(key), std::to_string(value)); }

    bool contains(std::string_view key) const;
    /// Throws InvalidArgument when the key is missing.
    const std::string& get(std::string_view key) const;
    double get_double(std::string_view key) const;
    long long get_int(std::string_view key) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }
    friend bool operator==(const KeyValues&, const KeyValues&) = default;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

KeyValues parse_key_values(std::istream& in);
KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(std::ostream& out, const KeyValues& kv);
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);

/// Tab-separated table: a header of the first row's keys, then one line per
/// row. Every row must have the same keys in the same order.
void write_table(std::ostream& out, const std::vector<KeyValues>& rows);
std::vector<KeyValues> parse_table(std::istream& in);

/// Every SyntheticSpec field plus the generator and RNG names.
KeyValues synthetic_metadata(const SyntheticSpec& spec);
/// Inverse of synthetic_metadata.
SyntheticSpec synthetic_spec_from_metadata(const KeyValues& kv);

/// Writes `contents` to a sibling temporary file and renames it into place,
/// so a failed run never leaves a partial output behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

} // namespace hipad
