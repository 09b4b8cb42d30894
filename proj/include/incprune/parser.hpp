#pragma once

#include <charconv>
#include <cstdio>
#include <istream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace incprune {

// Problem files use the line-oriented subset of the common .pomdp text format:
//
//   discount: <float>          values: reward
//   states: <n | name...>      actions: <n | name...>      observations: <n | name...>
//   T: <a> : <s> : <s'> <p>    T: <a> : <s> <row>          T: <a> <matrix> | identity | uniform
//   O: <a> : <s'> : <z> <p>    O: <a> : <s'> <row>         O: <a> <matrix> | uniform
//   R: <a> : <s> : <s'> : <z> <float>
//
// `*` expands over the whole index range, later entries overwrite earlier
// ones, and `#` starts a comment. Rewards conditioned on (s', z) are reduced
// to r^a(s) by taking the expectation under Pr(s'|s,a) Pr(z|s',a).

namespace detail {

struct Token {
    std::string text;
    std::size_t line;
    std::size_t column;
};

inline std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t line = 1, column = 1, i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
    };
    while (i < text.size()) {
        const char c = text[i];
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') advance(1);
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
        } else if (c == ':') {
            tokens.push_back({":", line, column});
            advance(1);
        } else {
            const std::size_t start = i, l = line, col = column;
            while (i < text.size() && text[i] != ':' && text[i] != '#' && text[i] != ' ' && text[i] != '\t' &&
                   text[i] != '\r' && text[i] != '\n')
                advance(1);
            tokens.push_back({std::string(text.substr(start, i - start)), l, col});
        }
    }
    return tokens;
}

inline std::optional<double> to_number(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s[0] == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<std::size_t> to_count(const std::string& s) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

class ProblemParser {
public:
    explicit ProblemParser(std::string_view text) : tokens_(tokenize(text)) {}

    PomdpModel parse() {
        while (!at_end()) statement();
        if (!discount_) throw ParseError(last_line(), 1, "missing 'discount:' declaration");
        if (states_.empty()) throw ParseError(last_line(), 1, "missing 'states:' declaration");
        if (actions_.empty()) throw ParseError(last_line(), 1, "missing 'actions:' declaration");
        if (observations_.empty()) throw ParseError(last_line(), 1, "missing 'observations:' declaration");
        ensure_tables();

        const std::size_t ns = states_.size(), na = actions_.size(), nz = observations_.size();
        std::vector<double> reward(na * ns, 0.0);
        if (rich_reward_) {
            // Validate T and O before taking expectations under them.
            PomdpModel probe(states_, actions_, observations_, transition_, observation_, reward, *discount_);
            for (std::size_t a = 0; a < na; ++a)
                for (std::size_t s = 0; s < ns; ++s) {
                    double r = 0.0;
                    for (std::size_t next = 0; next < ns; ++next)
                        for (std::size_t z = 0; z < nz; ++z)
                            r += probe.transition(a, s, next) * probe.observation(a, next, z) *
                                 reward4_[((a * ns + s) * ns + next) * nz + z];
                    reward[a * ns + s] = r;
                }
        } else {
            for (std::size_t a = 0; a < na; ++a)
                for (std::size_t s = 0; s < ns; ++s) reward[a * ns + s] = reward4_[((a * ns + s) * ns) * nz];
        }
        return PomdpModel(states_, actions_, observations_, transition_, observation_, std::move(reward), *discount_);
    }

private:
    bool at_end() const { return pos_ >= tokens_.size(); }

    std::size_t last_line() const { return tokens_.empty() ? 1 : tokens_.back().line; }

    [[noreturn]] void fail(const std::string& message) const {
        if (at_end()) throw ParseError(last_line(), 1, message + " (at end of input)");
        throw ParseError(tokens_[pos_].line, tokens_[pos_].column, message);
    }

    [[noreturn]] void fail_at(const Token& t, const std::string& message) const {
        throw ParseError(t.line, t.column, message);
    }

    const Token& peek() const {
        if (at_end()) fail("unexpected end of input");
        return tokens_[pos_];
    }

    const Token& take() {
        const Token& t = peek();
        ++pos_;
        return t;
    }

    void expect_colon() {
        if (at_end() || tokens_[pos_].text != ":") fail("expected ':'");
        ++pos_;
    }

    bool next_is_colon() const { return !at_end() && tokens_[pos_].text == ":"; }

    // A token directly followed by ':' starts the next statement.
    bool at_statement_start() const {
        return pos_ + 1 < tokens_.size() && tokens_[pos_ + 1].text == ":" && tokens_[pos_].text != ":";
    }

    double number() {
        const Token& t = take();
        auto v = to_number(t.text);
        if (!v) fail_at(t, "expected a number, found '" + t.text + "'");
        return *v;
    }

    std::vector<std::string> name_list(const std::string& kind, const std::string& prefix) {
        std::vector<const Token*> items;
        while (!at_end() && !at_statement_start()) items.push_back(&take());
        if (items.empty()) fail("empty '" + kind + ":' declaration");
        std::vector<std::string> names;
        if (items.size() == 1) {
            if (auto n = to_count(items[0]->text)) {
                if (*n == 0) fail_at(*items[0], kind + " count must be positive");
                for (std::size_t i = 0; i < *n; ++i) names.push_back(prefix + std::to_string(i));
                return names;
            }
        }
        for (const Token* t : items) {
            if (t->text == "*") fail_at(*t, "'*' is not a valid name");
            for (const auto& existing : names)
                if (existing == t->text) fail_at(*t, "duplicate name '" + t->text + "'");
            names.push_back(t->text);
        }
        return names;
    }

    // Index set referenced by a token: '*', a declared name, or a numeric index.
    std::vector<std::size_t> refs(const std::vector<std::string>& names, const std::string& kind) {
        const Token& t = take();
        std::vector<std::size_t> out;
        if (t.text == "*") {
            for (std::size_t i = 0; i < names.size(); ++i) out.push_back(i);
            return out;
        }
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == t.text) return {i};
        if (auto n = to_count(t.text); n && *n < names.size()) return {*n};
        fail_at(t, "unknown " + kind + " '" + t.text + "'");
    }

    void ensure_tables() {
        if (tables_ready_) return;
        if (states_.empty() || actions_.empty() || observations_.empty())
            fail("T/O/R entries require states, actions and observations to be declared first");
        const std::size_t ns = states_.size(), na = actions_.size(), nz = observations_.size();
        transition_.assign(na * ns * ns, 0.0);
        observation_.assign(na * ns * nz, 0.0);
        reward4_.assign(na * ns * ns * nz, 0.0);
        tables_ready_ = true;
    }

    void statement() {
        const Token& key = take();
        expect_colon();
        if (key.text == "discount") {
            discount_ = number();
        } else if (key.text == "values") {
            const Token& v = take();
            if (v.text != "reward") fail_at(v, "only 'values: reward' is supported");
        } else if (key.text == "states") {
            if (tables_ready_) fail_at(key, "'states:' must precede T/O/R entries");
            states_ = name_list("states", "s");
        } else if (key.text == "actions") {
            if (tables_ready_) fail_at(key, "'actions:' must precede T/O/R entries");
            actions_ = name_list("actions", "a");
        } else if (key.text == "observations") {
            if (tables_ready_) fail_at(key, "'observations:' must precede T/O/R entries");
            observations_ = name_list("observations", "z");
        } else if (key.text == "start") {
            // The initial belief is not part of the model; skip its tokens.
            while (!at_end() && !at_statement_start()) take();
        } else if (key.text == "T") {
            ensure_tables();
            transition_statement();
        } else if (key.text == "O") {
            ensure_tables();
            observation_statement();
        } else if (key.text == "R") {
            ensure_tables();
            reward_statement();
        } else {
            fail_at(key, "unknown declaration '" + key.text + "'");
        }
    }

    double& t_at(std::size_t a, std::size_t s, std::size_t next) {
        const std::size_t ns = states_.size();
        return transition_[(a * ns + s) * ns + next];
    }
    double& o_at(std::size_t a, std::size_t next, std::size_t z) {
        return observation_[(a * states_.size() + next) * observations_.size() + z];
    }

    void transition_statement() {
        const std::size_t ns = states_.size();
        const auto as = refs(actions_, "action");
        if (next_is_colon()) {
            expect_colon();
            const auto ss = refs(states_, "state");
            if (next_is_colon()) {
                expect_colon();
                const auto nexts = refs(states_, "state");
                const double p = number();
                for (auto a : as)
                    for (auto s : ss)
                        for (auto n : nexts) t_at(a, s, n) = p;
            } else {
                std::vector<double> row = row_or_keyword(ns, ss.size() == 1 ? std::optional(ss[0]) : std::nullopt);
                for (auto a : as)
                    for (auto s : ss)
                        for (std::size_t n = 0; n < ns; ++n) t_at(a, s, n) = row[n];
            }
            return;
        }
        const Token& t = peek();
        if (t.text == "identity" || t.text == "uniform") {
            take();
            for (auto a : as)
                for (std::size_t s = 0; s < ns; ++s)
                    for (std::size_t n = 0; n < ns; ++n)
                        t_at(a, s, n) = t.text == "identity" ? (s == n ? 1.0 : 0.0) : 1.0 / static_cast<double>(ns);
            return;
        }
        std::vector<double> matrix(ns * ns);
        for (auto& v : matrix) v = number();
        for (auto a : as)
            for (std::size_t s = 0; s < ns; ++s)
                for (std::size_t n = 0; n < ns; ++n) t_at(a, s, n) = matrix[s * ns + n];
    }

    // Row of `width` numbers, or `uniform`; `identity` is allowed for a single row.
    std::vector<double> row_or_keyword(std::size_t width, std::optional<std::size_t> identity_index) {
        std::vector<double> row(width);
        const Token& t = peek();
        if (t.text == "uniform") {
            take();
            for (auto& v : row) v = 1.0 / static_cast<double>(width);
        } else if (t.text == "identity" && identity_index) {
            take();
            row[*identity_index] = 1.0;
        } else {
            for (auto& v : row) v = number();
        }
        return row;
    }

    void observation_statement() {
        const std::size_t ns = states_.size(), nz = observations_.size();
        const auto as = refs(actions_, "action");
        if (next_is_colon()) {
            expect_colon();
            const auto nexts = refs(states_, "state");
            if (next_is_colon()) {
                expect_colon();
                const auto zs = refs(observations_, "observation");
                const double p = number();
                for (auto a : as)
                    for (auto n : nexts)
                        for (auto z : zs) o_at(a, n, z) = p;
            } else {
                std::vector<double> row = row_or_keyword(nz, std::nullopt);
                for (auto a : as)
                    for (auto n : nexts)
                        for (std::size_t z = 0; z < nz; ++z) o_at(a, n, z) = row[z];
            }
            return;
        }
        if (peek().text == "uniform") {
            take();
            for (auto a : as)
                for (std::size_t n = 0; n < ns; ++n)
                    for (std::size_t z = 0; z < nz; ++z) o_at(a, n, z) = 1.0 / static_cast<double>(nz);
            return;
        }
        std::vector<double> matrix(ns * nz);
        for (auto& v : matrix) v = number();
        for (auto a : as)
            for (std::size_t n = 0; n < ns; ++n)
                for (std::size_t z = 0; z < nz; ++z) o_at(a, n, z) = matrix[n * nz + z];
    }

    void reward_statement() {
        const std::size_t ns = states_.size(), nz = observations_.size();
        const auto as = refs(actions_, "action");
        expect_colon();
        const auto ss = refs(states_, "state");
        expect_colon();
        const auto nexts = refs(states_, "state");
        expect_colon();
        const auto zs = refs(observations_, "observation");
        const double r = number();
        if (nexts.size() != ns || zs.size() != nz) rich_reward_ = true;
        for (auto a : as)
            for (auto s : ss)
                for (auto n : nexts)
                    for (auto z : zs) reward4_[((a * ns + s) * ns + n) * nz + z] = r;
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::optional<double> discount_;
    std::vector<std::string> states_, actions_, observations_;
    bool tables_ready_ = false;
    bool rich_reward_ = false;
    std::vector<double> transition_, observation_, reward4_;
};

inline std::string format_number(double v) {
    if (v == 0.0) v = 0.0;  // drop the sign of negative zero
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline PomdpModel parse_pomdp(std::string_view text) { return detail::ProblemParser(text).parse(); }

inline PomdpModel parse_pomdp(std::istream& in) {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_pomdp(std::string_view(text));
}

/// Writes `model` in the problem grammar with every table spelled out at 17
/// significant digits, so parsing the output reproduces the tables exactly.
inline void serialize_pomdp(std::ostream& out, const PomdpModel& model) {
    using detail::format_number;
    auto names = [&](const char* key, const std::vector<std::string>& list) {
        out << key << ':';
        for (const auto& n : list) out << ' ' << n;
        out << '\n';
    };
    out << "discount: " << format_number(model.discount()) << '\n';
    out << "values: reward\n";
    names("states", model.state_names());
    names("actions", model.action_names());
    names("observations", model.observation_names());
    const std::size_t ns = model.num_states(), nz = model.num_observations();
    for (std::size_t a = 0; a < model.num_actions(); ++a) {
        out << "\nT: " << model.action_names()[a] << '\n';
        for (std::size_t s = 0; s < ns; ++s) {
            for (std::size_t n = 0; n < ns; ++n) out << (n ? " " : "") << format_number(model.transition(a, s, n));
            out << '\n';
        }
    }
    for (std::size_t a = 0; a < model.num_actions(); ++a) {
        out << "\nO: " << model.action_names()[a] << '\n';
        for (std::size_t n = 0; n < ns; ++n) {
            for (std::size_t z = 0; z < nz; ++z) out << (z ? " " : "") << format_number(model.observation(a, n, z));
            out << '\n';
        }
    }
    out << '\n';
    for (std::size_t a = 0; a < model.num_actions(); ++a)
        for (std::size_t s = 0; s < ns; ++s)
            out << "R: " << model.action_names()[a] << " : " << model.state_names()[s] << " : * : * "
                << format_number(model.reward(a, s)) << '\n';
}

inline std::string serialize_pomdp(const PomdpModel& model) {
    std::ostringstream out;
    serialize_pomdp(out, model);
    return out.str();
}

}  // namespace incprune
