#pragma once

#include <cctype>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "covpb/observables.hpp"

namespace covpb {

/// Recursive-descent parser for the observable expression format:
///
///   expr     := term (('+' | '-') term)*
///   term     := factor ('*' factor)*
///   factor   := scalar | variable | '(' expr ')' | '-' factor
///   variable := 'A'  '[' j ',' mu ']'   amplitude component A_mu(j)
///             | 'Ac' '[' j ',' mu ']'   its complex conjugate
///             | 'x'  '[' mu ']'         particle position x_mu
///             | 'p'  '[' mu ']'         particle momentum p_mu
///   scalar   := number | number 'i' | 'i'
///
/// Example: "2*A[0,1]*Ac[0,1] - i*x[0]*p[3]".
class ExprParser {
public:
    explicit ExprParser(std::string_view src) : src_(src) {}

    PolyObservable parse() {
        PolyObservable e = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) {
            fail("trailing characters");
        }
        return e;
    }

private:
    PolyObservable parse_expr() {
        PolyObservable e = parse_term();
        for (;;) {
            skip_ws();
            if (consume('+')) {
                e += parse_term();
            } else if (consume('-')) {
                e -= parse_term();
            } else {
                return e;
            }
        }
    }

    PolyObservable parse_term() {
        PolyObservable t = parse_factor();
        for (;;) {
            skip_ws();
            if (consume('*')) {
                t = t * parse_factor();
            } else {
                return t;
            }
        }
    }

    PolyObservable parse_factor() {
        skip_ws();
        if (consume('(')) {
            PolyObservable e = parse_expr();
            skip_ws();
            if (!consume(')')) fail("expected ')'");
            return e;
        }
        if (consume('-')) {
            return -parse_factor();
        }
        if (pos_ < src_.size() && (std::isdigit(peek()) || peek() == '.')) {
            return parse_scalar();
        }
        if (pos_ < src_.size() && peek() == 'i' && !is_name_char(peek_at(1))) {
            ++pos_;
            return PolyObservable::constant(Complex(0.0, 1.0));
        }
        return parse_variable();
    }

    PolyObservable parse_scalar() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isdigit(peek()) || peek() == '.' || peek() == 'e' ||
                peek() == 'E' ||
                ((peek() == '+' || peek() == '-') && pos_ > start &&
                 (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E')))) {
            ++pos_;
        }
        double value = 0.0;
        try {
            value = std::stod(std::string(src_.substr(start, pos_ - start)));
        } catch (const std::exception&) {
            fail("bad number");
        }
        if (pos_ < src_.size() && peek() == 'i') {
            ++pos_;
            return PolyObservable::constant(Complex(0.0, value));
        }
        return PolyObservable::constant(Complex(value, 0.0));
    }

    PolyObservable parse_variable() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < src_.size() && is_name_char(peek())) ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);
        skip_ws();
        if (!consume('[')) fail("expected '[' after variable name");
        const long first = parse_int();
        long second = -1;
        skip_ws();
        if (consume(',')) {
            second = parse_int();
        }
        skip_ws();
        if (!consume(']')) fail("expected ']'");

        auto check_mu = [&](long mu) {
            if (mu < 0 || mu > 3) fail("Lorentz index must be 0..3");
            return static_cast<std::size_t>(mu);
        };
        if (name == "A" || name == "Ac") {
            if (second < 0) fail("amplitude variables need [mode,index]");
            if (first < 0) fail("mode index must be >= 0");
            const std::size_t j = static_cast<std::size_t>(first);
            const std::size_t mu = check_mu(second);
            return PolyObservable::variable(name == "A" ? amp_var(j, mu)
                                                        : amp_conj_var(j, mu));
        }
        if (name == "x" || name == "p") {
            if (second >= 0) fail("particle variables take a single index");
            const std::size_t mu = check_mu(first);
            return PolyObservable::variable(name == "x" ? x_var(mu) : p_var(mu));
        }
        fail("unknown variable '" + std::string(name) + "'");
        return {};
    }

    long parse_int() {
        skip_ws();
        const std::size_t start = pos_;
        if (pos_ < src_.size() && (peek() == '+' || peek() == '-')) ++pos_;
        while (pos_ < src_.size() && std::isdigit(peek())) ++pos_;
        if (pos_ == start) fail("expected integer");
        return std::stol(std::string(src_.substr(start, pos_ - start)));
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(peek())) ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() const { return src_[pos_]; }

    char peek_at(std::size_t off) const {
        return pos_ + off < src_.size() ? src_[pos_ + off] : '\0';
    }

    static bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)); }

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("expression error at position " +
                                    std::to_string(pos_) + ": " + msg);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

inline PolyObservable parse_observable(std::string_view src) {
    return ExprParser(src).parse();
}

} // namespace covpb
