#include "smallgain/parser.hpp"

#include <cctype>
#include <charconv>
#include <system_error>
#include <vector>

#include "smallgain/error.hpp"

namespace smallgain {

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    GainExpr parse() {
        skip_ws();
        if (at_end()) fail("empty gain expression");
        GainExpr e = expr();
        skip_ws();
        if (!at_end()) {
            if (peek() == '-') reject("subtraction does not preserve class K");
            fail(std::string("unexpected '") + peek() + "'");
        }
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(pos_, msg); }

    [[noreturn]] void reject(const std::string& msg) const {
        throw Error(ErrorKind::RejectedNotClassK,
                    "at position " + std::to_string(pos_) + ": " + msg);
    }

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return at_end() ? '\0' : text_[pos_]; }

    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    bool accept_word(std::string_view w) {
        skip_ws();
        if (text_.substr(pos_, w.size()) == w) {
            pos_ += w.size();
            return true;
        }
        return false;
    }

    double number() {
        skip_ws();
        if (peek() == '-') reject("negative coefficients are not class K");
        const char* begin = text_.data() + pos_;
        const char* end = text_.data() + text_.size();
        if (at_end() || !(std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) {
            fail("expected a number");
        }
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(begin, end, value, std::chars_format::general);
        if (ec != std::errc()) fail("malformed number");
        pos_ += static_cast<std::size_t>(ptr - begin);
        return value;
    }

    GainExpr expr() {
        std::vector<GainExpr> terms;
        terms.push_back(term());
        for (;;) {
            skip_ws();
            if (peek() == '-') reject("subtraction does not preserve class K");
            if (!accept('+')) break;
            terms.push_back(term());
        }
        if (terms.size() == 1) return terms.front();
        return GainExpr::sum(std::move(terms));
    }

    GainExpr term() {
        skip_ws();
        const char c = peek();
        if (c == '(') {
            ++pos_;
            GainExpr inner = expr();
            expect(')');
            skip_ws();
            // 'o' followed by '(' is composition; anything else ends the group.
            if (peek() == 'o') {
                ++pos_;
                expect('(');
                GainExpr rhs = expr();
                expect(')');
                return GainExpr::compose(std::move(inner), std::move(rhs));
            }
            return inner;
        }
        if (accept_word("max")) {
            expect('(');
            std::vector<GainExpr> args;
            args.push_back(expr());
            while (accept(',')) args.push_back(expr());
            expect(')');
            return GainExpr::max(std::move(args));
        }
        if (accept_word("id")) {
            expect('+');
            expect('(');
            GainExpr inner = expr();
            expect(')');
            return GainExpr::plus_id(std::move(inner));
        }
        const std::size_t start = pos_;
        const double coeff = number();
        skip_ws();
        if (peek() != '*') {
            if (coeff == 0.0) return GainExpr::zero();
            pos_ = start;
            fail("constants other than 0 are not class K");
        }
        ++pos_;
        if (!(coeff > 0.0)) reject("coefficients must be positive");
        return leaf(coeff);
    }

    GainExpr leaf(double coeff) {
        if (accept_word("sqrt")) {
            expect('(');
            expect('s');
            expect(')');
            return GainExpr::power(coeff, 0.5);
        }
        if (accept_word("atan")) {
            expect('(');
            expect('s');
            expect(')');
            return GainExpr::atan(coeff);
        }
        if (!accept('s')) fail("expected 's', 'sqrt(s)' or 'atan(s)'");
        if (accept('^')) {
            const double p = number();
            if (!(p > 0.0)) reject("exponents must be positive");
            return GainExpr::power(coeff, p);
        }
        skip_ws();
        if (peek() == '/') {
            ++pos_;
            expect('(');
            const std::size_t one_at = pos_;
            if (number() != 1.0) {
                pos_ = one_at;
                fail("only s/(1+s) is supported");
            }
            expect('+');
            expect('s');
            expect(')');
            return GainExpr::saturating(coeff);
        }
        return GainExpr::linear(coeff);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void format_into(const GainExpr& g, std::string& out);

void format_operand(const GainExpr& g, std::string& out) {
    // Sum children are grouped so nested sums survive a round trip.
    if (g.kind() == GainExpr::Kind::Sum) {
        out += '(';
        format_into(g, out);
        out += ')';
    } else {
        format_into(g, out);
    }
}

void format_into(const GainExpr& g, std::string& out) {
    using K = GainExpr::Kind;
    switch (g.kind()) {
        case K::Zero: out += '0'; return;
        case K::Linear: out += format_number(g.coeff()) + "*s"; return;
        case K::Power:
            out += format_number(g.coeff()) + "*s^" + format_number(g.exponent());
            return;
        case K::Saturating: out += format_number(g.coeff()) + "*s/(1+s)"; return;
        case K::Atan: out += format_number(g.coeff()) + "*atan(s)"; return;
        case K::Sum: {
            bool first = true;
            for (const auto& c : g.children()) {
                if (!first) out += '+';
                first = false;
                format_operand(c, out);
            }
            return;
        }
        case K::Max: {
            out += "max(";
            bool first = true;
            for (const auto& c : g.children()) {
                if (!first) out += ", ";
                first = false;
                format_into(c, out);
            }
            out += ')';
            return;
        }
        case K::Compose:
            out += '(';
            format_into(g.children()[0], out);
            out += ")o(";
            format_into(g.children()[1], out);
            out += ')';
            return;
        case K::PlusId:
            out += "id+(";
            format_into(g.children()[0], out);
            out += ')';
            return;
    }
}

}  // namespace

GainExpr parse_gain(std::string_view text) { return Parser(text).parse(); }

std::string format_gain(const GainExpr& g) {
    std::string out;
    format_into(g, out);
    return out;
}

}  // namespace smallgain
