#pragma once

// Flat key=value configuration text with dotted section prefixes.
//
//   model = effective
//   params.lambda = 0.0012
//   params.gamma = 0.038/46        # arithmetic is evaluated on read
//   init.re_a1 = 100               # defaulted
//
// A trailing "# defaulted" comment marks values filled in from defaults; any
// other comment is ignored.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nhsim::config {

struct Entry {
    std::string key;
    std::string value;     // source text, kept verbatim
    bool defaulted = false;
    std::size_t line = 0;  // 0 when not read from text
};

class Config {
public:
    const std::vector<Entry>& entries() const { return entries_; }

    bool has(const std::string& key) const { return find(key) != nullptr; }
    const Entry* find(const std::string& key) const;

    /// Inserts or replaces; replacing keeps the original position.
    Entry& set(const std::string& key, const std::string& value, bool defaulted = false);
    bool erase(const std::string& key);

    std::string text(const std::string& key) const;
    double number(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const; // comma separated

    /// Entries whose key starts with `prefix`, in order.
    std::vector<Entry> with_prefix(const std::string& prefix) const;

    /// ConfigError text pointing at the entry's line when known.
    [[noreturn]] void fail(const std::string& key, const std::string& message) const;

private:
    std::vector<Entry> entries_;
};

/// Parses config text. Errors carry "<source>:<line>:" prefixes.
Config parse(std::istream& in, const std::string& source = "<config>");
Config parse_string(const std::string& text, const std::string& source = "<config>");

/// One "key = value" line per entry, defaulted entries marked.
std::string serialize(const Config& cfg);

/// Evaluates + - * / and parentheses over decimal literals.
double evaluate(const std::string& expr);
std::optional<double> try_evaluate(const std::string& expr);

/// on/off, true/false, yes/no, 1/0.
bool parse_flag(const std::string& text);

std::string trim(const std::string& s);

} // namespace nhsim::config
