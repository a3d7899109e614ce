#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace gridsyn {

// Versioned `key = value` text files. The first non-comment line is the
// header (e.g. "gridsyn-params v1"); `#` starts a comment.
class KvFile {
public:
    static KvFile parse(std::istream& in, const std::string& expected_header,
                        const std::string& source = "<stream>");
    static KvFile load(const std::string& path, const std::string& expected_header);

    bool has(const std::string& key) const;
    const std::string& str(const std::string& key) const;
    std::string str(const std::string& key, const std::string& fallback) const;
    double num(const std::string& key) const;
    double num(const std::string& key, double fallback) const;
    long long integer(const std::string& key) const;
    long long integer(const std::string& key, long long fallback) const;
    std::vector<double> list(const std::string& key) const;
    std::vector<double> list(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<std::string> words(const std::string& key) const;

    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, const std::vector<double>& values);

    void write(std::ostream& out) const;
    void save(const std::string& path) const;

    const std::string& header() const { return header_; }
    void set_header(std::string h) { header_ = std::move(h); }
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
    const std::string& source() const { return source_; }

private:
    std::string where(const std::string& key) const;

    std::string header_;
    std::string source_;
    std::vector<std::pair<std::string, std::string>> entries_;
    std::vector<int> lines_;
};

// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace gridsyn
