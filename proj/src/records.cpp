#include "paudit/records.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "paudit/errors.hpp"

namespace paudit {

namespace fs = std::filesystem;

std::string record_context(const fs::path& path, std::size_t line) {
    return fmt::format("{}:{}", path.string(), line);
}

std::vector<Record> read_records(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IOError(fmt::format("cannot open {}", path.string()));

    std::vector<Record> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        Json value;
        try {
            value = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw ParseError(fmt::format("{}: malformed record: {}", record_context(path, lineno),
                                         e.what()));
        }
        if (!value.is_object())
            throw ParseError(
                fmt::format("{}: record is not an object", record_context(path, lineno)));
        out.push_back({std::move(value), lineno});
    }
    if (in.bad()) throw IOError(fmt::format("read failure on {}", path.string()));
    return out;
}

void write_text_file(const fs::path& path, std::string_view contents) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IOError(fmt::format("cannot write {}", tmp.string()));
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw IOError(fmt::format("write failure on {}", tmp.string()));
    }
    fs::rename(tmp, path, ec);
    if (ec) throw IOError(fmt::format("cannot move {} into place: {}", path.string(), ec.message()));
}

void write_records(const fs::path& path, const std::vector<Json>& records) {
    std::string buf;
    for (const auto& r : records) {
        buf += r.dump(-1, ' ', false, Json::error_handler_t::strict);
        buf += '\n';
    }
    write_text_file(path, buf);
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IOError(fmt::format("cannot open {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string required_string(const Json& rec, std::string_view field, std::string_view context) {
    auto it = rec.find(field);
    if (it == rec.end())
        throw ParseError(fmt::format("{}: missing field '{}'", context, field));
    if (!it->is_string())
        throw ParseError(fmt::format("{}: field '{}' must be a string", context, field));
    return it->get<std::string>();
}

std::vector<std::string> required_string_list(const Json& rec, std::string_view field,
                                              std::string_view context) {
    auto it = rec.find(field);
    if (it == rec.end())
        throw ParseError(fmt::format("{}: missing field '{}'", context, field));
    if (!it->is_array())
        throw ParseError(fmt::format("{}: field '{}' must be a list", context, field));
    std::vector<std::string> out;
    out.reserve(it->size());
    for (const auto& v : *it) {
        if (!v.is_string())
            throw ParseError(
                fmt::format("{}: field '{}' must contain only strings", context, field));
        out.push_back(v.get<std::string>());
    }
    return out;
}

std::optional<std::string> optional_string(const Json& rec, std::string_view field,
                                           std::string_view context) {
    auto it = rec.find(field);
    if (it == rec.end() || it->is_null()) return std::nullopt;
    if (!it->is_string())
        throw ParseError(fmt::format("{}: field '{}' must be a string", context, field));
    return it->get<std::string>();
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) { return fmt::format("{:016x}", value); }

}  // namespace paudit
