#include "mtfwfm/log_io.hpp"

#include "mtfwfm/error.hpp"

#include <nlohmann/json.hpp>
#include <zlib.h>

#include <fstream>
#include <memory>
#include <sstream>

namespace mtfwfm {

namespace {

using nlohmann::json;

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_gz(const std::string& path) { return ends_with(path, ".gz"); }

bool is_csv(const std::string& path) {
    return ends_with(path, ".csv") || ends_with(path, ".csv.gz");
}

class LineReader {
public:
    explicit LineReader(const std::string& path) : path_(path) {
        if (is_gz(path)) {
            gz_ = gzopen(path.c_str(), "rb");
            if (!gz_) throw DataError("cannot open '" + path + "'");
        } else {
            file_.open(path);
            if (!file_) throw DataError("cannot open '" + path + "'");
        }
    }
    ~LineReader() {
        if (gz_) gzclose(gz_);
    }
    LineReader(const LineReader&) = delete;
    LineReader& operator=(const LineReader&) = delete;

    bool next(std::string& line) {
        if (gz_) {
            line.clear();
            char buf[4096];
            for (;;) {
                if (!gzgets(gz_, buf, sizeof buf)) return !line.empty();
                line += buf;
                if (!line.empty() && line.back() == '\n') {
                    line.pop_back();
                    return true;
                }
            }
        }
        return static_cast<bool>(std::getline(file_, line));
    }

private:
    std::string path_;
    std::ifstream file_;
    gzFile gz_ = nullptr;
};

class LineWriter {
public:
    explicit LineWriter(const std::string& path) : path_(path) {
        if (is_gz(path)) {
            gz_ = gzopen(path.c_str(), "wb");
            if (!gz_) throw DataError("cannot open '" + path + "' for writing");
        } else {
            file_.open(path, std::ios::trunc);
            if (!file_) throw DataError("cannot open '" + path + "' for writing");
        }
    }
    ~LineWriter() {
        if (gz_) gzclose(gz_);
    }
    LineWriter(const LineWriter&) = delete;
    LineWriter& operator=(const LineWriter&) = delete;

    void write(const std::string& line) {
        if (gz_) {
            if (gzwrite(gz_, line.data(), unsigned(line.size())) != int(line.size()) || gzputc(gz_, '\n') < 0)
                throw DataError("write to '" + path_ + "' failed");
        } else {
            file_ << line << '\n';
            if (!file_) throw DataError("write to '" + path_ + "' failed");
        }
    }

private:
    std::string path_;
    std::ofstream file_;
    gzFile gz_ = nullptr;
};

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    cells.push_back(std::move(cur));
    return cells;
}

json parse_json_line(const std::string& line, const std::string& path, size_t lineno) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw DataError(path + ":" + std::to_string(lineno) + ": not a JSON object");
    return j;
}

template <class T>
T require(const json& j, const char* key, const std::string& path, size_t lineno) {
    auto it = j.find(key);
    if (it == j.end())
        throw DataError(path + ":" + std::to_string(lineno) + ": missing key '" + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw DataError(path + ":" + std::to_string(lineno) + ": key '" + key + "' has the wrong type");
    }
}

int64_t parse_ts(const std::string& cell, const std::string& path, size_t lineno) {
    try {
        size_t pos = 0;
        const int64_t v = std::stoll(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw DataError(path + ":" + std::to_string(lineno) + ": bad timestamp '" + cell + "'");
    }
}

} // namespace

std::vector<ImpressionRecord> read_impressions(const std::string& path) {
    std::vector<ImpressionRecord> out;
    LineReader reader(path);
    std::string line;
    size_t lineno = 0;
    if (is_csv(path)) {
        std::vector<std::string> header;
        while (reader.next(line)) {
            ++lineno;
            if (line.empty()) continue;
            auto cells = csv_split(line);
            if (header.empty()) {
                header = std::move(cells);
                if (header.size() < 3 || header[0] != "ts" || header[1] != "user_id" || header[2] != "line_id")
                    throw DataError(path + ": impression CSV header must start with ts,user_id,line_id");
                continue;
            }
            if (cells.size() != header.size())
                throw DataError(path + ":" + std::to_string(lineno) + ": wrong column count");
            ImpressionRecord rec;
            rec.ts = parse_ts(cells[0], path, lineno);
            rec.user_id = cells[1];
            rec.line_id = cells[2];
            for (size_t c = 3; c < cells.size(); ++c) rec.field_values[header[c]] = cells[c];
            out.push_back(std::move(rec));
        }
        return out;
    }
    while (reader.next(line)) {
        ++lineno;
        if (line.empty()) continue;
        const json j = parse_json_line(line, path, lineno);
        ImpressionRecord rec;
        rec.ts = require<int64_t>(j, "ts", path, lineno);
        rec.user_id = require<std::string>(j, "user_id", path, lineno);
        rec.line_id = require<std::string>(j, "line_id", path, lineno);
        const json fields = require<json>(j, "fields", path, lineno);
        if (!fields.is_object()) throw DataError(path + ":" + std::to_string(lineno) + ": 'fields' must be an object");
        for (const auto& [k, v] : fields.items()) {
            if (!v.is_string()) throw DataError(path + ":" + std::to_string(lineno) + ": field values must be strings");
            rec.field_values[k] = v.get<std::string>();
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<ConversionRecord> read_conversions(const std::string& path) {
    std::vector<ConversionRecord> out;
    LineReader reader(path);
    std::string line;
    size_t lineno = 0;
    const bool csv = is_csv(path);
    bool header_seen = false;
    while (reader.next(line)) {
        ++lineno;
        if (line.empty()) continue;
        ConversionRecord rec;
        if (csv) {
            auto cells = csv_split(line);
            if (!header_seen) {
                if (cells != std::vector<std::string>{"ts", "user_id", "line_id", "conv_type"})
                    throw DataError(path + ": conversion CSV header must be ts,user_id,line_id,conv_type");
                header_seen = true;
                continue;
            }
            if (cells.size() != 4) throw DataError(path + ":" + std::to_string(lineno) + ": wrong column count");
            rec.ts = parse_ts(cells[0], path, lineno);
            rec.user_id = cells[1];
            rec.line_id = cells[2];
            rec.conv_type = cells[3];
        } else {
            const json j = parse_json_line(line, path, lineno);
            rec.ts = require<int64_t>(j, "ts", path, lineno);
            rec.user_id = require<std::string>(j, "user_id", path, lineno);
            rec.line_id = require<std::string>(j, "line_id", path, lineno);
            rec.conv_type = require<std::string>(j, "conv_type", path, lineno);
        }
        if (rec.ts < 0) throw DataError(path + ":" + std::to_string(lineno) + ": negative conversion timestamp");
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<LineRecord> read_lines_file(const std::string& path) {
    std::vector<LineRecord> out;
    LineReader reader(path);
    std::string line;
    size_t lineno = 0;
    const bool csv = is_csv(path);
    bool header_seen = false;
    while (reader.next(line)) {
        ++lineno;
        if (line.empty()) continue;
        LineRecord rec;
        if (csv) {
            auto cells = csv_split(line);
            if (!header_seen) {
                if (cells != std::vector<std::string>{"line_id", "conv_type"})
                    throw DataError(path + ": lines CSV header must be line_id,conv_type");
                header_seen = true;
                continue;
            }
            if (cells.size() != 2) throw DataError(path + ":" + std::to_string(lineno) + ": wrong column count");
            rec.line_id = cells[0];
            rec.conv_type = cells[1];
        } else {
            const json j = parse_json_line(line, path, lineno);
            rec.line_id = require<std::string>(j, "line_id", path, lineno);
            rec.conv_type = require<std::string>(j, "conv_type", path, lineno);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

void write_impressions(std::span<const ImpressionRecord> records, const std::string& path) {
    LineWriter writer(path);
    if (is_csv(path)) {
        // All records must share one field set for the CSV form.
        std::string header = "ts,user_id,line_id";
        std::vector<std::string> field_names;
        if (!records.empty())
            for (const auto& [k, v] : records.front().field_values) {
                (void)v;
                field_names.push_back(k);
                header += "," + csv_quote(k);
            }
        writer.write(header);
        for (const auto& rec : records) {
            std::string row = std::to_string(rec.ts) + "," + csv_quote(rec.user_id) + "," + csv_quote(rec.line_id);
            for (const auto& name : field_names) {
                auto it = rec.field_values.find(name);
                row += ",";
                row += csv_quote(it != rec.field_values.end() ? it->second : kMissingToken);
            }
            writer.write(row);
        }
        return;
    }
    for (const auto& rec : records) {
        json j;
        j["ts"] = rec.ts;
        j["user_id"] = rec.user_id;
        j["line_id"] = rec.line_id;
        j["fields"] = json::object();
        for (const auto& [k, v] : rec.field_values) j["fields"][k] = v;
        writer.write(j.dump());
    }
}

void write_conversions(std::span<const ConversionRecord> records, const std::string& path) {
    LineWriter writer(path);
    if (is_csv(path)) {
        writer.write("ts,user_id,line_id,conv_type");
        for (const auto& rec : records)
            writer.write(std::to_string(rec.ts) + "," + csv_quote(rec.user_id) + "," + csv_quote(rec.line_id) + "," +
                         csv_quote(rec.conv_type));
        return;
    }
    for (const auto& rec : records) {
        json j;
        j["ts"] = rec.ts;
        j["user_id"] = rec.user_id;
        j["line_id"] = rec.line_id;
        j["conv_type"] = rec.conv_type;
        writer.write(j.dump());
    }
}

void write_lines_file(std::span<const LineRecord> records, const std::string& path) {
    LineWriter writer(path);
    if (is_csv(path)) {
        writer.write("line_id,conv_type");
        for (const auto& rec : records) writer.write(csv_quote(rec.line_id) + "," + csv_quote(rec.conv_type));
        return;
    }
    for (const auto& rec : records) {
        json j;
        j["line_id"] = rec.line_id;
        j["conv_type"] = rec.conv_type;
        writer.write(j.dump());
    }
}

} // namespace mtfwfm
