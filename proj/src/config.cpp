#include "nhsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>

#include "nhsim/error.hpp"

namespace nhsim::config {

namespace {

class ExprParser {
public:
    explicit ExprParser(const std::string& s) : s_(s) {}

    double parse() {
        const double v = sum();
        skip_ws();
        if (pos_ != s_.size()) error("unexpected '" + std::string(1, s_[pos_]) + "'");
        return v;
    }

private:
    [[noreturn]] void error(const std::string& what) const {
        throw ConfigError("bad number '" + s_ + "': " + what);
    }

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    double sum() {
        double v = product();
        for (;;) {
            if (eat('+')) v += product();
            else if (eat('-')) v -= product();
            else return v;
        }
    }

    double product() {
        double v = unary();
        for (;;) {
            if (eat('*')) {
                v *= unary();
            } else if (eat('/')) {
                const double d = unary();
                if (d == 0.0) error("division by zero");
                v /= d;
            } else {
                return v;
            }
        }
    }

    double unary() {
        if (eat('-')) return -unary();
        if (eat('+')) return unary();
        if (eat('(')) {
            const double v = sum();
            if (!eat(')')) error("missing ')'");
            return v;
        }
        skip_ws();
        double v = 0.0;
        const char* begin = s_.data() + pos_;
        const char* end = s_.data() + s_.size();
        auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc() || ptr == begin) error("expected a number");
        pos_ += static_cast<std::size_t>(ptr - begin);
        return v;
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool valid_key(const std::string& k) {
    if (k.empty() || k.front() == '.' || k.back() == '.') return false;
    return std::all_of(k.begin(), k.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '.' || c == '-';
    });
}

} // namespace

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double evaluate(const std::string& expr) {
    const double v = ExprParser(expr).parse();
    if (!std::isfinite(v)) throw ConfigError("bad number '" + expr + "': not finite");
    return v;
}

std::optional<double> try_evaluate(const std::string& expr) {
    try {
        return evaluate(expr);
    } catch (const ConfigError&) {
        return std::nullopt;
    }
}

bool parse_flag(const std::string& text) {
    const auto t = lower(trim(text));
    if (t == "on" || t == "true" || t == "yes" || t == "1") return true;
    if (t == "off" || t == "false" || t == "no" || t == "0") return false;
    throw ConfigError("expected on/off, got '" + text + "'");
}

const Entry* Config::find(const std::string& key) const {
    for (const auto& e : entries_) {
        if (e.key == key) return &e;
    }
    return nullptr;
}

Entry& Config::set(const std::string& key, const std::string& value, bool defaulted) {
    for (auto& e : entries_) {
        if (e.key == key) {
            e.value = value;
            e.defaulted = defaulted;
            return e;
        }
    }
    return entries_.emplace_back(Entry{key, value, defaulted, 0});
}

bool Config::erase(const std::string& key) {
    const auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.key == key; });
    if (it == entries_.end()) return false;
    entries_.erase(it);
    return true;
}

void Config::fail(const std::string& key, const std::string& message) const {
    const Entry* e = find(key);
    std::string where = (e && e->line) ? "line " + std::to_string(e->line) + ": " : "";
    throw ConfigError(where + key + ": " + message);
}

std::string Config::text(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) throw ConfigError("missing key '" + key + "'");
    return e->value;
}

double Config::number(const std::string& key) const {
    const std::string t = text(key);
    try {
        return evaluate(t);
    } catch (const ConfigError& err) {
        fail(key, err.what());
    }
}

bool Config::flag(const std::string& key) const {
    const std::string t = text(key);
    try {
        return parse_flag(t);
    } catch (const ConfigError& err) {
        fail(key, err.what());
    }
}

std::vector<double> Config::numbers(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(text(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(evaluate(trim(item)));
        } catch (const ConfigError& err) {
            fail(key, err.what());
        }
    }
    return out;
}

std::vector<Entry> Config::with_prefix(const std::string& prefix) const {
    std::vector<Entry> out;
    for (const auto& e : entries_) {
        if (e.key.rfind(prefix, 0) == 0) out.push_back(e);
    }
    return out;
}

Config parse(std::istream& in, const std::string& source) {
    Config cfg;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string body = raw;
        std::string comment;
        if (const auto hash = raw.find('#'); hash != std::string::npos) {
            body = raw.substr(0, hash);
            comment = trim(raw.substr(hash + 1));
        }
        body = trim(body);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        const std::string at = source + ":" + std::to_string(line_no) + ": ";
        if (eq == std::string::npos) {
            throw ConfigError(at + "expected 'key = value'");
        }
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (!valid_key(key)) {
            throw ConfigError(at + "invalid key '" + key + "'");
        }
        if (value.empty()) {
            throw ConfigError(at + key + ": empty value");
        }
        if (cfg.has(key)) {
            throw ConfigError(at + key + ": duplicate key");
        }
        cfg.set(key, value, comment == "defaulted").line = line_no;
    }
    return cfg;
}

Config parse_string(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    return parse(in, source);
}

std::string serialize(const Config& cfg) {
    std::ostringstream os;
    for (const auto& e : cfg.entries()) {
        os << e.key << " = " << e.value;
        if (e.defaulted) os << "  # defaulted";
        os << '\n';
    }
    return os.str();
}

} // namespace nhsim::config
