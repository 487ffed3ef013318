#include "hipad/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <system_error>

#include "hipad/error.hpp"

namespace hipad {

namespace {

constexpr std::string_view kWhitespace = " \t\r";

std::vector<std::string_view> split_tokens(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        pos = line.find_first_not_of(kWhitespace, pos);
        if (pos == std::string_view::npos) break;
        std::size_t end = line.find_first_of(kWhitespace, pos);
        if (end == std::string_view::npos) end = line.size();
        out.push_back(line.substr(pos, end - pos));
        pos = end;
    }
    return out;
}

bool skippable(std::string_view line)
{
    const std::size_t pos = line.find_first_not_of(kWhitespace);
    return pos == std::string_view::npos || line[pos] == '#';
}

double parse_double_at(std::string_view text, std::size_t line)
{
    try {
        return parse_double(text);
    } catch (const ParseError& e) {
        throw ParseError(e.message(), line);
    }
}

std::size_t parse_index(std::string_view text, std::size_t line)
{
    std::size_t value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
        throw ParseError("bad feature index '" + std::string(text) + "'", line);
    }
    return value;
}

struct IndexValue {
    std::size_t index;
    double value;
};

IndexValue parse_pair(std::string_view token, std::size_t line)
{
    const std::size_t colon = token.find(':');
    if (colon == std::string_view::npos) throw ParseError("expected idx:val, got '" + std::string(token) + "'", line);
    return {parse_index(token.substr(0, colon), line), parse_double_at(token.substr(colon + 1), line)};
}

double parse_label(std::string_view token, std::size_t line)
{
    const double raw = parse_double_at(token, line);
    if (raw == 1.0) return 1.0;
    if (raw == -1.0 || raw == 0.0) return -1.0;
    throw ParseError("label '" + std::string(token) + "' is not one of +1, -1, 1, 0", line);
}

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

template <class Writer>
void write_via_buffer(const std::filesystem::path& path, Writer&& writer)
{
    std::ostringstream buffer;
    writer(buffer);
    write_file_atomic(path, buffer.str());
}

void check_key(std::string_view key)
{
    if (key.empty() || key.find_first_of("=\t\n\r") != std::string_view::npos) {
        throw InvalidArgument("bad key '" + std::string(key) + "'");
    }
}

void check_value(std::string_view value)
{
    if (value.find_first_of("\t\n\r") != std::string_view::npos) {
        throw InvalidArgument("value contains a tab or newline");
    }
}

std::string block_flags(const std::array<bool, 4>& flags)
{
    std::string out;
    for (bool f : flags) out += f ? '1' : '0';
    return out;
}

std::array<bool, 4> parse_block_flags(const std::string& text)
{
    if (text.size() != 4 || text.find_first_not_of("01") != std::string::npos) {
        throw ParseError("block flags must be four characters of 0/1, got '" + text + "'", 0);
    }
    std::array<bool, 4> out{};
    for (std::size_t k = 0; k < 4; ++k) out[k] = text[k] == '1';
    return out;
}

} // namespace

std::string format_double(double value)
{
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) throw InvalidArgument("cannot format double");
    return std::string(buf.data(), end);
}

double parse_double(std::string_view text)
{
    std::string_view body = text;
    if (!body.empty() && body.front() == '+') body.remove_prefix(1);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
    if (body.empty() || ec != std::errc{} || end != body.data() + body.size()) {
        throw ParseError("bad number '" + std::string(text) + "'", 0);
    }
    return value;
}

// ---------------------------------------------------------------- LIBSVM

DataMatrix parse_libsvm(std::istream& in, const LibsvmReadOptions& options)
{
    std::vector<std::vector<SparseMatrix::Entry>> rows;
    Vector labels;
    std::optional<bool> labeled = options.labeled;
    std::size_t max_index = 0;
    std::string line;
    std::size_t line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (skippable(line)) continue;
        const auto tokens = split_tokens(line);
        const bool has_label = tokens.front().find(':') == std::string_view::npos;
        if (!labeled) labeled = has_label;
        if (*labeled != has_label) {
            throw ParseError(*labeled ? "missing label" : "unexpected label in unlabeled data", line_no);
        }

        std::vector<SparseMatrix::Entry> row;
        std::size_t first = 0;
        if (has_label) {
            labels.push_back(parse_label(tokens.front(), line_no));
            first = 1;
        }
        row.reserve(tokens.size() - first);
        for (std::size_t t = first; t < tokens.size(); ++t) {
            const IndexValue iv = parse_pair(tokens[t], line_no);
            if (iv.index == 0) throw ParseError("feature indices are 1-based; got 0", line_no);
            if (!row.empty() && iv.index - 1 <= row.back().first) {
                throw ParseError("feature indices must be strictly increasing", line_no);
            }
            if (options.features && iv.index > *options.features) {
                throw ParseError("feature index " + std::to_string(iv.index) + " exceeds the feature count " +
                                     std::to_string(*options.features),
                                 line_no);
            }
            max_index = std::max(max_index, iv.index);
            row.emplace_back(iv.index - 1, iv.value);
        }
        rows.push_back(std::move(row));
    }
    if (in.bad()) throw IoError("read error");
    if (rows.empty()) throw ParseError("no samples in LIBSVM input", 0);

    const std::size_t m = options.features.value_or(max_index);
    return DataMatrix(SparseMatrix::from_rows(m, rows), std::move(labels));
}

DataMatrix read_libsvm(const std::filesystem::path& path, const LibsvmReadOptions& options)
{
    std::ifstream in = open_input(path);
    try {
        return parse_libsvm(in, options);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.message(), e.line());
    }
}

void write_libsvm(std::ostream& out, const DataMatrix& data)
{
    const auto y = data.y();
    const bool labeled = !y.empty();
    for (std::size_t i = 0; i < data.samples(); ++i) {
        bool first = true;
        if (labeled) {
            out << (y[i] > 0 ? "+1" : "-1");
            first = false;
        }
        const auto idx = data.x().row_indices(i);
        const auto val = data.x().row_values(i);
        for (std::size_t q = 0; q < idx.size(); ++q) {
            if (!first) out << ' ';
            out << idx[q] + 1 << ':' << format_double(val[q]);
            first = false;
        }
        out << '\n';
    }
}

void write_libsvm(const std::filesystem::path& path, const DataMatrix& data)
{
    write_via_buffer(path, [&](std::ostream& out) { write_libsvm(out, data); });
}

// ------------------------------------------------------------- knowledge

KnowledgeSet parse_knowledge(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!skippable(line)) return true;
        }
        return false;
    };

    if (!next_line()) throw ParseError("knowledge file is empty (expected an 'm k1 k2' header)", 0);
    const auto header = split_tokens(line);
    if (header.size() != 3) throw ParseError("header must be 'm k1 k2'", line_no);
    const std::size_t m = parse_index(header[0], line_no);
    const std::size_t k1 = parse_index(header[1], line_no);
    const std::size_t k2 = parse_index(header[2], line_no);

    auto read_side = [&](std::size_t count, const char* name, Vector& rhs) {
        std::vector<std::vector<SparseMatrix::Entry>> rows(count);
        rhs.assign(count, 0.0);
        for (std::size_t r = 0; r < count; ++r) {
            if (!next_line()) {
                throw ParseError(std::string("expected ") + std::to_string(count) + " " + name + " rows, found " +
                                     std::to_string(r),
                                 line_no);
            }
            const auto tokens = split_tokens(line);
            if (tokens.back().find(':') != std::string_view::npos) {
                throw ParseError(std::string("row must end with its ") + name + " right-hand side", line_no);
            }
            for (std::size_t t = 0; t + 1 < tokens.size(); ++t) {
                const IndexValue iv = parse_pair(tokens[t], line_no);
                if (iv.index >= m) {
                    throw ParseError("index " + std::to_string(iv.index) + " is out of range for m = " +
                                         std::to_string(m),
                                     line_no);
                }
                if (!rows[r].empty() && iv.index <= rows[r].back().first) {
                    throw ParseError("indices must be strictly increasing", line_no);
                }
                rows[r].emplace_back(iv.index, iv.value);
            }
            rhs[r] = parse_double_at(tokens.back(), line_no);
        }
        return SparseMatrix::from_rows(m, rows);
    };

    Vector d, g;
    SparseMatrix b = read_side(k1, "positive-rule", d);
    SparseMatrix dn = read_side(k2, "negative-rule", g);
    if (next_line()) throw ParseError("unexpected content after the last rule", line_no);
    if (in.bad()) throw IoError("read error");
    return KnowledgeSet(std::move(b), std::move(d), std::move(dn), std::move(g));
}

KnowledgeSet read_knowledge(const std::filesystem::path& path)
{
    std::ifstream in = open_input(path);
    try {
        return parse_knowledge(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.message(), e.line());
    }
}

void write_knowledge(std::ostream& out, const KnowledgeSet& knowledge)
{
    out << knowledge.features() << ' ' << knowledge.k1() << ' ' << knowledge.k2() << '\n';
    auto write_side = [&](const SparseMatrix& m, const Vector& rhs) {
        for (std::size_t r = 0; r < m.rows(); ++r) {
            const auto idx = m.row_indices(r);
            const auto val = m.row_values(r);
            for (std::size_t q = 0; q < idx.size(); ++q) out << idx[q] << ':' << format_double(val[q]) << ' ';
            out << format_double(rhs[r]) << '\n';
        }
    };
    write_side(knowledge.b, knowledge.d);
    write_side(knowledge.dn, knowledge.g);
}

void write_knowledge(const std::filesystem::path& path, const KnowledgeSet& knowledge)
{
    write_via_buffer(path, [&](std::ostream& out) { write_knowledge(out, knowledge); });
}

// ----------------------------------------------------------------- model

SvmModel parse_model(std::istream& in)
{
    SvmModel model;
    std::string line;
    std::size_t line_no = 0;
    bool have_bias = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tokens = split_tokens(line);
        if (tokens.empty()) throw ParseError("blank line in model file", line_no);
        if (tokens.size() != 1) throw ParseError("expected one token per line", line_no);
        if (!have_bias) {
            model.bias = parse_double_at(tokens[0], line_no);
            have_bias = true;
            continue;
        }
        const IndexValue iv = parse_pair(tokens[0], line_no);
        if (!model.support.empty() && iv.index <= model.support.back()) {
            throw ParseError("weight indices must be strictly increasing", line_no);
        }
        model.support.push_back(iv.index);
        model.weights.push_back(iv.value);
    }
    if (in.bad()) throw IoError("read error");
    if (!have_bias) throw ParseError("model file is empty (expected a bias line)", 0);
    return model;
}

SvmModel read_model(const std::filesystem::path& path)
{
    std::ifstream in = open_input(path);
    try {
        return parse_model(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.message(), e.line());
    }
}

void write_model(std::ostream& out, const SvmModel& model)
{
    model.validate();
    out << format_double(model.bias) << '\n';
    for (std::size_t k = 0; k < model.support.size(); ++k) {
        out << model.support[k] << ':' << format_double(model.weights[k]) << '\n';
    }
}

void write_model(const std::filesystem::path& path, const SvmModel& model)
{
    write_via_buffer(path, [&](std::ostream& out) { write_model(out, model); });
}

// ------------------------------------------------------------ key-values

void KeyValues::set(std::string key, std::string value)
{
    check_key(key);
    check_value(value);
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    entries_.emplace_back(std::move(key), std::move(value));
}

bool KeyValues::contains(std::string_view key) const
{
    return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
}

const std::string& KeyValues::get(std::string_view key) const
{
    for (const auto& [k, v] : entries_) {
        if (k == key) return v;
    }
    throw InvalidArgument("missing key '" + std::string(key) + "'");
}

double KeyValues::get_double(std::string_view key) const
{
    try {
        return parse_double(get(key));
    } catch (const ParseError&) {
        throw ParseError("key '" + std::string(key) + "' is not a number", 0);
    }
}

long long KeyValues::get_int(std::string_view key) const
{
    const std::string& text = get(key);
    long long value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || end != text.data() + text.size()) {
        throw ParseError("key '" + std::string(key) + "' is not an integer", 0);
    }
    return value;
}

KeyValues parse_key_values(std::istream& in)
{
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos || eq == 0) throw ParseError("expected key=value", line_no);
        std::string key = line.substr(0, eq);
        if (kv.contains(key)) throw ParseError("duplicate key '" + key + "'", line_no);
        try {
            kv.set(std::move(key), line.substr(eq + 1));
        } catch (const InvalidArgument& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    if (in.bad()) throw IoError("read error");
    return kv;
}

KeyValues read_key_values(const std::filesystem::path& path)
{
    std::ifstream in = open_input(path);
    return parse_key_values(in);
}

void write_key_values(std::ostream& out, const KeyValues& kv)
{
    for (const auto& [k, v] : kv.entries()) out << k << '=' << v << '\n';
}

void write_key_values(const std::filesystem::path& path, const KeyValues& kv)
{
    write_via_buffer(path, [&](std::ostream& out) { write_key_values(out, kv); });
}

void write_table(std::ostream& out, const std::vector<KeyValues>& rows)
{
    if (rows.empty()) return;
    const auto& head = rows.front().entries();
    for (std::size_t c = 0; c < head.size(); ++c) out << (c ? "\t" : "") << head[c].first;
    out << '\n';
    for (const KeyValues& row : rows) {
        const auto& e = row.entries();
        if (e.size() != head.size()) throw InvalidArgument("table rows have different columns");
        for (std::size_t c = 0; c < e.size(); ++c) {
            if (e[c].first != head[c].first) throw InvalidArgument("table rows have different columns");
            out << (c ? "\t" : "") << e[c].second;
        }
        out << '\n';
    }
}

std::vector<KeyValues> parse_table(std::istream& in)
{
    auto split_tabs = [](const std::string& line) {
        std::vector<std::string> cells;
        std::size_t pos = 0;
        while (true) {
            const std::size_t tab = line.find('\t', pos);
            cells.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
            if (tab == std::string::npos) break;
            pos = tab + 1;
        }
        return cells;
    };
    std::vector<KeyValues> rows;
    std::string line;
    if (!std::getline(in, line)) return rows;
    const auto header = split_tabs(line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_tabs(line);
        if (cells.size() != header.size()) throw ParseError("row has the wrong number of cells", line_no);
        KeyValues kv;
        for (std::size_t c = 0; c < cells.size(); ++c) kv.set(header[c], cells[c]);
        rows.push_back(std::move(kv));
    }
    return rows;
}

// -------------------------------------------------------------- metadata

KeyValues synthetic_metadata(const SyntheticSpec& spec)
{
    KeyValues kv;
    kv.set("generator", std::string("knowledge-blocks"));
    kv.set("rng", std::string("mt19937_64"));
    kv.set("seed", std::to_string(spec.seed));
    kv.set_int("n_train", static_cast<long long>(spec.n_train));
    kv.set_int("n_test", static_cast<long long>(spec.n_test));
    kv.set_int("m", static_cast<long long>(spec.m));
    kv.set_int("block_length", static_cast<long long>(spec.block_length));
    kv.set_int("block_offset", 0);
    for (std::size_t k = 0; k < 4; ++k) kv.set("block_mean_" + std::to_string(k + 1), spec.block_means[k]);
    kv.set("correlation", spec.correlation);
    kv.set("noise_min", spec.noise_min);
    kv.set("noise_max", spec.noise_max);
    kv.set("train_blocks", block_flags(spec.train_blocks));
    kv.set("test_blocks", block_flags(spec.test_blocks));
    return kv;
}

SyntheticSpec synthetic_spec_from_metadata(const KeyValues& kv)
{
    if (kv.get("generator") != "knowledge-blocks") throw ParseError("unknown generator '" + kv.get("generator") + "'", 0);
    if (kv.get("rng") != "mt19937_64") throw ParseError("unknown rng '" + kv.get("rng") + "'", 0);
    if (kv.get_int("block_offset") != 0) throw ParseError("only block_offset = 0 is supported", 0);
    auto count = [&](const char* key) {
        const long long v = kv.get_int(key);
        if (v < 0) throw ParseError(std::string(key) + " must be nonnegative", 0);
        return static_cast<std::size_t>(v);
    };
    SyntheticSpec spec;
    const std::string& seed = kv.get("seed");
    const auto [end, ec] = std::from_chars(seed.data(), seed.data() + seed.size(), spec.seed);
    if (seed.empty() || ec != std::errc{} || end != seed.data() + seed.size()) throw ParseError("bad seed '" + seed + "'", 0);
    spec.n_train = count("n_train");
    spec.n_test = count("n_test");
    spec.m = count("m");
    spec.block_length = count("block_length");
    for (std::size_t k = 0; k < 4; ++k) spec.block_means[k] = kv.get_double("block_mean_" + std::to_string(k + 1));
    spec.correlation = kv.get_double("correlation");
    spec.noise_min = kv.get_double("noise_min");
    spec.noise_max = kv.get_double("noise_max");
    spec.train_blocks = parse_block_flags(kv.get("train_blocks"));
    spec.test_blocks = parse_block_flags(kv.get("test_blocks"));
    spec.validate();
    return spec;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw IoError("write to '" + path.string() + "' failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place at '" + path.string() + "'");
    }
}

} // namespace hipad
