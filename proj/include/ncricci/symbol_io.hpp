#pragma once

// Text form of symbol words and golden-file comparison.
//
// Words are space-separated atoms: b0, b0^3, k, k^2, k^-1, d1(k^2), d1(d2(k^2)), d2(k).
// d1(d2(k^2)) is delta_1 applied to delta_2(k^2).

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "symbol.hpp"

namespace ncricci {

inline std::string kpow_string(int q) { return q == 1 ? "k" : "k^" + std::to_string(q); }

inline std::string atom_string(const Atom& a) {
    switch (a.kind) {
        case Atom::Kind::B0:
            return "b0";
        case Atom::Kind::KPow:
            return kpow_string(a.q);
        case Atom::Kind::Tag: {
            std::string s = kpow_string(a.q);
            for (char d : a.dirs) s = std::string("d") + d + "(" + s + ")";
            return s;
        }
    }
    return {};
}

inline std::string word_string(const std::vector<Atom>& f) {
    std::string out;
    for (std::size_t i = 0; i < f.size();) {
        if (!out.empty()) out += ' ';
        if (f[i].is_b0()) {
            std::size_t j = i;
            while (j < f.size() && f[j].is_b0()) ++j;
            out += j - i == 1 ? "b0" : "b0^" + std::to_string(j - i);
            i = j;
        } else {
            out += atom_string(f[i++]);
        }
    }
    return out.empty() ? "1" : out;
}

namespace detail {

inline int parse_kpow(const std::string& s) {
    if (s == "k") return 1;
    if (s.rfind("k^", 0) == 0) return std::stoi(s.substr(2));
    throw InputError("symbol-engine", "bad k-power '" + s + "'");
}

inline void parse_atom(const std::string& tok, std::vector<Atom>& out) {
    if (tok == "1") return;
    if (tok == "b0") {
        out.push_back(Atom::b0());
        return;
    }
    if (tok.rfind("b0^", 0) == 0) {
        int n = std::stoi(tok.substr(3));
        for (int i = 0; i < n; ++i) out.push_back(Atom::b0());
        return;
    }
    if (tok[0] == 'k') {
        out.push_back(Atom::kpow(parse_kpow(tok)));
        return;
    }
    std::string s = tok, outer_first;
    while (s.size() > 4 && s[0] == 'd' && s[2] == '(' && s.back() == ')') {
        if (s[1] != '1' && s[1] != '2') throw InputError("symbol-engine", "bad derivation in '" + tok + "'");
        outer_first += s[1];
        s = s.substr(3, s.size() - 4);
    }
    if (outer_first.empty()) throw InputError("symbol-engine", "cannot parse atom '" + tok + "'");
    std::reverse(outer_first.begin(), outer_first.end());
    out.push_back(Atom::tag(parse_kpow(s), outer_first));
}

}  // namespace detail

inline std::vector<Atom> parse_word(const std::string& text) {
    std::istringstream is(text);
    std::vector<Atom> out;
    std::string tok;
    while (is >> tok) detail::parse_atom(tok, out);
    return out;
}

// One fully expanded term: a single Gaussian-rational times a monomial in tau1, tau2, pi.
// r < 0 marks a xi-word; r >= 0 marks a post-angular word r^r * factors.
struct FlatTerm {
    int r = -1;
    int xi1 = 0;
    int xi2 = 0;
    std::vector<Atom> factors;
    MatrixPart mat = MatrixPart::I;
    CoeffMonomial mono;
    GaussRational c;

    auto operator<=>(const FlatTerm&) const = default;
    bool operator==(const FlatTerm&) const = default;

    std::string str() const {
        std::ostringstream os;
        os << c.str();
        if (mono.tau1) os << " tau1^" << mono.tau1;
        if (mono.tau2) os << " tau2^" << mono.tau2;
        if (mono.pi) os << " pi^" << mono.pi;
        if (r >= 0) os << " r^" << r;
        if (xi1) os << " xi1^" << xi1;
        if (xi2) os << " xi2^" << xi2;
        os << " | " << word_string(factors);
        if (mat == MatrixPart::Sigma) os << " (x) sigma";
        return os.str();
    }
};

inline std::vector<FlatTerm> flatten(const SymbolExpr& e) {
    std::vector<FlatTerm> out;
    for (const auto& [key, coeff] : e.terms())
        for (const auto& [mono, g] : coeff.terms())
            out.push_back(FlatTerm{-1, key.xi1, key.xi2, key.factors, key.mat, mono, g});
    std::sort(out.begin(), out.end());
    return out;
}

inline Rational parse_rational(const std::string& s) {
    try {
        auto slash = s.find('/');
        if (slash == std::string::npos) return Rational(boost::multiprecision::cpp_int(s));
        return Rational(boost::multiprecision::cpp_int(s.substr(0, slash)),
                        boost::multiprecision::cpp_int(s.substr(slash + 1)));
    } catch (const std::exception&) {
        throw InputError("symbol-engine", "bad rational '" + s + "'");
    }
}

inline std::string rational_string(const Rational& r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

inline FlatTerm flat_term_from_json(const nlohmann::json& j) {
    FlatTerm t;
    t.c.re = parse_rational(j.value("coeff", std::string("0")));
    t.c.im = parse_rational(j.value("im", std::string("0")));
    t.mono = CoeffMonomial{j.value("tau1", 0), j.value("tau2", 0), j.value("pi", 0)};
    if (j.contains("r")) t.r = j.at("r").get<int>();
    if (j.contains("xi")) {
        t.xi1 = j.at("xi").at(0).get<int>();
        t.xi2 = j.at("xi").at(1).get<int>();
    }
    t.factors = normalize_factors(parse_word(j.at("word").get<std::string>()));
    t.mat = j.value("matrix", std::string("I")) == "sigma" ? MatrixPart::Sigma : MatrixPart::I;
    return t;
}

inline nlohmann::json flat_term_to_json(const FlatTerm& t) {
    nlohmann::json j;
    j["coeff"] = rational_string(t.c.re);
    if (t.c.im != 0) j["im"] = rational_string(t.c.im);
    if (t.mono.tau1) j["tau1"] = t.mono.tau1;
    if (t.mono.tau2) j["tau2"] = t.mono.tau2;
    if (t.mono.pi) j["pi"] = t.mono.pi;
    if (t.r >= 0)
        j["r"] = t.r;
    else
        j["xi"] = {t.xi1, t.xi2};
    j["word"] = word_string(t.factors);
    if (t.mat == MatrixPart::Sigma) j["matrix"] = "sigma";
    return j;
}

// A golden file is {"description": ..., "terms": [...]}. Like terms are combined on load.
inline std::vector<FlatTerm> load_golden(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("symbol-engine", "cannot open golden file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw InputError("symbol-engine", std::string("malformed golden file: ") + e.what());
    }
    std::vector<FlatTerm> raw;
    for (const auto& t : j.at("terms")) raw.push_back(flat_term_from_json(t));
    std::sort(raw.begin(), raw.end(), [](const FlatTerm& a, const FlatTerm& b) {
        return std::tie(a.r, a.xi1, a.xi2, a.factors, a.mat, a.mono) <
               std::tie(b.r, b.xi1, b.xi2, b.factors, b.mat, b.mono);
    });
    std::vector<FlatTerm> out;
    for (auto& t : raw) {
        if (!out.empty() && std::tie(out.back().r, out.back().xi1, out.back().xi2, out.back().factors, out.back().mat,
                                     out.back().mono) == std::tie(t.r, t.xi1, t.xi2, t.factors, t.mat, t.mono))
            out.back().c = out.back().c + t.c;
        else
            out.push_back(std::move(t));
        if (out.back().c.is_zero()) out.pop_back();
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct MultisetDiff {
    std::vector<FlatTerm> only_computed;
    std::vector<FlatTerm> only_golden;
    bool empty() const { return only_computed.empty() && only_golden.empty(); }
};

inline MultisetDiff multiset_diff(std::vector<FlatTerm> computed, std::vector<FlatTerm> golden) {
    std::sort(computed.begin(), computed.end());
    std::sort(golden.begin(), golden.end());
    MultisetDiff d;
    std::set_difference(computed.begin(), computed.end(), golden.begin(), golden.end(),
                        std::back_inserter(d.only_computed));
    std::set_difference(golden.begin(), golden.end(), computed.begin(), computed.end(),
                        std::back_inserter(d.only_golden));
    return d;
}

inline std::string pretty(const SymbolExpr& e) {
    std::ostringstream os;
    for (const auto& t : flatten(e)) os << t.str() << '\n';
    return os.str();
}

}  // namespace ncricci
