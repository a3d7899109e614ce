#include "gridsyn/kvfile.hpp"

#include "gridsyn/errors.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gridsyn {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
    if (text.empty()) return false;
    char* end = nullptr;
    errno = 0;
    out = std::strtod(text.c_str(), &end);
    return errno == 0 && end == text.c_str() + text.size();
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    for (int prec = 6; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

KvFile KvFile::parse(std::istream& in, const std::string& expected_header,
                     const std::string& source) {
    KvFile kv;
    kv.source_ = source;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (kv.header_.empty()) {
            kv.header_ = line;
            if (!expected_header.empty() && line != expected_header)
                throw ConfigError(source + ":" + std::to_string(lineno) + ": expected header '" +
                                  expected_header + "', found '" + line + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": missing '='");
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
        if (kv.has(key))
            throw ConfigError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv.entries_.emplace_back(std::move(key), trim(line.substr(eq + 1)));
        kv.lines_.push_back(lineno);
    }
    if (kv.header_.empty()) throw ConfigError(source + ": empty file, no header");
    return kv;
}

KvFile KvFile::load(const std::string& path, const std::string& expected_header) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return parse(in, expected_header, path);
}

bool KvFile::has(const std::string& key) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](auto& e) { return e.first == key; });
}

std::string KvFile::where(const std::string& key) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].first == key)
            return source_ + ":" + (i < lines_.size() ? std::to_string(lines_[i]) : "?");
    return source_;
}

const std::string& KvFile::str(const std::string& key) const {
    for (auto& e : entries_)
        if (e.first == key) return e.second;
    throw ConfigError(source_ + ": missing key '" + key + "'");
}

std::string KvFile::str(const std::string& key, const std::string& fallback) const {
    return has(key) ? str(key) : fallback;
}

double KvFile::num(const std::string& key) const {
    double v;
    if (!parse_double(str(key), v))
        throw ConfigError(where(key) + ": '" + key + "' is not a number");
    return v;
}

double KvFile::num(const std::string& key, double fallback) const {
    return has(key) ? num(key) : fallback;
}

long long KvFile::integer(const std::string& key) const {
    const std::string& s = str(key);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || errno != 0 || end != s.c_str() + s.size())
        throw ConfigError(where(key) + ": '" + key + "' is not an integer");
    return v;
}

long long KvFile::integer(const std::string& key, long long fallback) const {
    return has(key) ? integer(key) : fallback;
}

std::vector<std::string> KvFile::words(const std::string& key) const {
    std::string s = str(key);
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string w; is >> w;) out.push_back(w);
    return out;
}

std::vector<double> KvFile::list(const std::string& key) const {
    std::vector<double> out;
    for (auto& w : words(key)) {
        double v;
        if (!parse_double(w, v))
            throw ConfigError(where(key) + ": '" + key + "' has non-numeric item '" + w + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<double> KvFile::list(const std::string& key, const std::vector<double>& fallback) const {
    return has(key) ? list(key) : fallback;
}

void KvFile::set(const std::string& key, const std::string& value) {
    for (auto& e : entries_)
        if (e.first == key) {
            e.second = value;
            return;
        }
    entries_.emplace_back(key, value);
    lines_.push_back(0);
}

void KvFile::set(const std::string& key, double value) { set(key, format_double(value)); }

void KvFile::set(const std::string& key, const std::vector<double>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += ", ";
        s += format_double(values[i]);
    }
    set(key, s);
}

void KvFile::write(std::ostream& out) const {
    out << header_ << '\n';
    for (auto& e : entries_) out << e.first << " = " << e.second << '\n';
}

void KvFile::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    write(out);
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace gridsyn
