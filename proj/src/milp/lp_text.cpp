#include "campopt/milp/lp_text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace campopt::milp {
namespace {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bool lp_safe(const std::string& name) {
    if (name.empty()) return false;
    if (std::isdigit(static_cast<unsigned char>(name[0])) || name[0] == '.') return false;
    for (char c : name) {
        if (std::isalnum(static_cast<unsigned char>(c))) continue;
        if (c == '_' || c == '.' || c == '(' || c == ')' || c == ',' || c == '#' ||
            c == '[' || c == ']') {
            continue;
        }
        return false;
    }
    return true;
}

std::vector<std::string> sanitized_names(const MilpModel& model, bool& changed) {
    std::vector<std::string> out;
    out.reserve(model.variables().size());
    std::unordered_map<std::string, int> used;
    changed = false;
    for (std::size_t j = 0; j < model.variables().size(); ++j) {
        std::string name = model.variables()[j].name;
        if (name.empty()) name = "x" + std::to_string(j);
        if (!lp_safe(name)) {
            std::string fixed;
            fixed.reserve(name.size());
            for (char c : name) {
                fixed += (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
                          c == '(' || c == ')' || c == ',' || c == '#')
                             ? c
                             : '_';
            }
            if (fixed.empty() || std::isdigit(static_cast<unsigned char>(fixed[0])) ||
                fixed[0] == '.') {
                fixed.insert(fixed.begin(), 'v');
            }
            name = fixed;
        }
        auto [it, fresh] = used.emplace(name, 1);
        if (!fresh) {
            name += "#" + std::to_string(++it->second);
            used.emplace(name, 1);
        }
        if (name != model.variables()[j].name) changed = true;
        out.push_back(std::move(name));
    }
    return out;
}

void append_terms(std::string& out, const std::vector<Term>& terms,
                  const std::vector<std::string>& names) {
    bool first = true;
    for (const Term& t : terms) {
        if (t.coefficient == 0.0) continue;
        double mag = std::abs(t.coefficient);
        if (first) {
            if (t.coefficient < 0.0) out += "- ";
        } else {
            out += (t.coefficient < 0.0) ? " - " : " + ";
        }
        out += format_number(mag);
        out += ' ';
        out += names[static_cast<std::size_t>(t.variable)];
        first = false;
    }
    if (first) out += "0";
}

std::vector<Term> objective_terms(const MilpModel& model) {
    std::vector<Term> terms;
    for (std::size_t j = 0; j < model.objective().size(); ++j) {
        if (model.objective()[j] != 0.0) {
            terms.push_back(Term{static_cast<int>(j), model.objective()[j]});
        }
    }
    return terms;
}

// ---------------------------------------------------------------------------
// Parsing

struct Token {
    enum Kind { Name, Number, Sign, Sense, Colon } kind;
    std::string text;
    double value = 0.0;
    int line = 0;
};

bool parse_double(const std::string& s, double& out) {
    std::string t = s;
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (t == "inf" || t == "+inf" || t == "infinity" || t == "+infinity" || t == "1e30") {
        out = kInfinity;
        return true;
    }
    if (t == "-inf" || t == "-infinity" || t == "-1e30") {
        out = -kInfinity;
        return true;
    }
    const char* begin = s.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end != begin && *end == '\0';
}

[[noreturn]] void fail(int line, const std::string& what) {
    throw std::runtime_error("lp parse: line " + std::to_string(line) + ": " + what);
}

std::vector<Token> tokenize_line(const std::string& line, int lineNo) {
    std::vector<Token> out;
    std::size_t i = 0;
    auto push = [&](Token::Kind k, std::string text) {
        Token t;
        t.kind = k;
        t.text = std::move(text);
        t.line = lineNo;
        out.push_back(std::move(t));
    };
    while (i < line.size()) {
        char c = line[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '\\') break; // comment to end of line
        if (c == ':') {
            push(Token::Colon, ":");
            ++i;
            continue;
        }
        if (c == '<' || c == '>' || c == '=') {
            std::string s(1, c);
            if (i + 1 < line.size() && line[i + 1] == '=') {
                s += '=';
                ++i;
            }
            push(Token::Sense, s == "<" ? "<=" : (s == ">" ? ">=" : s));
            ++i;
            continue;
        }
        if ((c == '+' || c == '-') &&
            !(i + 1 < line.size() &&
              (std::isdigit(static_cast<unsigned char>(line[i + 1])) || line[i + 1] == '.'))) {
            push(Token::Sign, std::string(1, c));
            ++i;
            continue;
        }
        // Number or name token: read until whitespace or operator.
        std::size_t start = i;
        while (i < line.size()) {
            char d = line[i];
            if (std::isspace(static_cast<unsigned char>(d)) || d == ':' || d == '<' ||
                d == '>' || d == '=' || d == '\\') {
                break;
            }
            if ((d == '+' || d == '-') && i != start) {
                // Keep exponent signs inside numbers (1e-3); split otherwise.
                char prev = line[i - 1];
                if (prev != 'e' && prev != 'E') break;
            }
            ++i;
        }
        std::string word = line.substr(start, i - start);
        double v = 0.0;
        if (parse_double(word, v)) {
            Token t;
            t.kind = Token::Number;
            t.text = word;
            t.value = v;
            t.line = lineNo;
            out.push_back(std::move(t));
        } else {
            push(Token::Name, word);
        }
    }
    return out;
}

class LpParser {
public:
    MilpModel parse(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        int lineNo = 0;
        bool sawContent = false;
        while (std::getline(in, line)) {
            ++lineNo;
            // The leading comment carries the model name in our own exports.
            if (!sawContent) {
                std::size_t pos = line.find_first_not_of(" \t\r");
                if (pos != std::string::npos && line[pos] == '\\') {
                    std::string name = line.substr(pos + 1);
                    std::size_t b = name.find_first_not_of(" \t");
                    std::size_t e = name.find_last_not_of(" \t\r");
                    if (b != std::string::npos) model_.set_name(name.substr(b, e - b + 1));
                    sawContent = true;
                    continue;
                }
            }
            std::vector<Token> toks = tokenize_line(line, lineNo);
            if (toks.empty()) continue;
            sawContent = true;
            if (switch_section(toks)) {
                if (toks.empty()) continue;
            }
            handle(toks);
        }
        finish_row();
        if (!sawObjective_) fail(lineNo, "missing Minimize section");
        return std::move(model_);
    }

private:
    enum class Section { None, Objective, Constraints, Bounds, Generals, Binaries, Done };

    static std::string lower(const std::string& s) {
        std::string t = s;
        std::transform(t.begin(), t.end(), t.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        return t;
    }

    // Recognizes a section keyword at the start of the token list; consumes
    // it (and "to"/"that") so the remainder can carry content.
    bool switch_section(std::vector<Token>& toks) {
        if (toks[0].kind != Token::Name) return false;
        std::string head = lower(toks[0].text);
        Section next = Section::None;
        std::size_t consumed = 1;
        if (head == "minimize" || head == "minimum" || head == "min") {
            next = Section::Objective;
        } else if (head == "maximize" || head == "maximum" || head == "max") {
            fail(toks[0].line, "maximization not supported; restate as a minimization");
        } else if (head == "subject" || head == "such") {
            if (toks.size() >= 2 && toks[1].kind == Token::Name) consumed = 2;
            next = Section::Constraints;
        } else if (head == "st" || head == "s.t." || head == "s.t") {
            next = Section::Constraints;
        } else if (head == "bounds" || head == "bound") {
            next = Section::Bounds;
        } else if (head == "generals" || head == "general" || head == "gen" ||
                   head == "integers" || head == "integer") {
            next = Section::Generals;
        } else if (head == "binaries" || head == "binary" || head == "bin") {
            next = Section::Binaries;
        } else if (head == "end") {
            next = Section::Done;
        } else {
            return false;
        }
        // Only treat the keyword as a section header outside term context:
        // a constraint row named "end:" keeps its meaning via the colon.
        if (toks.size() > consumed && toks[consumed].kind == Token::Colon) return false;
        finish_row();
        if (next == Section::Objective) sawObjective_ = true;
        section_ = next;
        toks.erase(toks.begin(), toks.begin() + static_cast<long>(consumed));
        return true;
    }

    int variable(const std::string& name, int line) {
        auto it = varIndex_.find(name);
        if (it != varIndex_.end()) return it->second;
        if (section_ == Section::Bounds || section_ == Section::Generals ||
            section_ == Section::Binaries) {
            // Standard LP semantics: unseen names here still declare variables.
        } else if (section_ == Section::None || section_ == Section::Done) {
            fail(line, "variable '" + name + "' outside any section");
        }
        int idx = model_.add_variable(name, 0.0, kInfinity, false);
        varIndex_.emplace(name, idx);
        return idx;
    }

    void handle(std::vector<Token>& toks) {
        switch (section_) {
            case Section::Objective:
            case Section::Constraints:
                handle_terms(toks);
                break;
            case Section::Bounds:
                handle_bounds(toks);
                break;
            case Section::Generals:
            case Section::Binaries:
                for (const Token& t : toks) {
                    if (t.kind != Token::Name) fail(t.line, "expected variable name");
                    int j = variable(t.text, t.line);
                    model_.mark_integral(j);
                    if (section_ == Section::Binaries) model_.tighten_bounds(j, 0.0, 1.0);
                }
                break;
            case Section::Done:
                fail(toks[0].line, "content after End");
            case Section::None:
                fail(toks[0].line, "content before Minimize");
        }
    }

    // Folds a pending standalone number (if any) into the expression's
    // constant part. "3 x" leaves 3 pending until x arrives; "3 +" or
    // "3 <=" means 3 was a constant.
    void fold_constant(int line) {
        (void)line;
        if (!haveCoef_) return;
        constant_ += sign_ * pendingCoef_;
        haveCoef_ = false;
        sign_ = 1.0;
    }

    void handle_terms(std::vector<Token>& toks) {
        std::size_t i = 0;
        // Leading "label:" names the current row (or the objective).
        if (toks.size() >= 2 && toks[0].kind == Token::Name && toks[1].kind == Token::Colon) {
            finish_row();
            rowName_ = toks[0].text;
            rowOpen_ = section_ == Section::Constraints;
            rowLine_ = toks[0].line;
            i = 2;
        } else if (section_ == Section::Constraints && !rowOpen_) {
            rowName_ = "c" + std::to_string(model_.rows().size());
            rowOpen_ = true;
            rowLine_ = toks[0].line;
        }
        for (; i < toks.size(); ++i) {
            const Token& t = toks[i];
            switch (t.kind) {
                case Token::Sign:
                    fold_constant(t.line);
                    sign_ *= (t.text == "-") ? -1.0 : 1.0;
                    break;
                case Token::Number:
                    if (haveCoef_) fail(t.line, "two consecutive numbers in expression");
                    pendingCoef_ = t.value;
                    haveCoef_ = true;
                    break;
                case Token::Name: {
                    int j = variable(t.text, t.line);
                    double coef = sign_ * (haveCoef_ ? pendingCoef_ : 1.0);
                    terms_.push_back(Term{j, coef});
                    sign_ = 1.0;
                    haveCoef_ = false;
                    break;
                }
                case Token::Sense: {
                    if (section_ != Section::Constraints) fail(t.line, "relation in objective");
                    fold_constant(t.line);
                    if (i + 1 >= toks.size()) fail(t.line, "missing right-hand side");
                    double rhsSign = 1.0;
                    std::size_t k = i + 1;
                    while (k < toks.size() && toks[k].kind == Token::Sign) {
                        rhsSign *= (toks[k].text == "-") ? -1.0 : 1.0;
                        ++k;
                    }
                    if (k >= toks.size() || toks[k].kind != Token::Number) {
                        fail(t.line, "right-hand side must be a number");
                    }
                    rowSense_ = t.text == "<=" ? Sense::LessEqual
                                               : (t.text == ">=" ? Sense::GreaterEqual : Sense::Equal);
                    rowRhs_ = rhsSign * toks[k].value - constant_;
                    constant_ = 0.0;
                    rowComplete_ = true;
                    i = k;
                    if (i + 1 < toks.size()) fail(t.line, "trailing tokens after right-hand side");
                    finish_row();
                    break;
                }
                case Token::Colon:
                    fail(t.line, "unexpected ':'");
            }
        }
        if (section_ == Section::Objective) {
            for (const Term& t : terms_) model_.set_objective(t.variable, t.coefficient);
            terms_.clear();
        }
    }

    void handle_bounds(std::vector<Token>& toks) {
        // Forms: "l <= x <= u", "x <= u", "x >= l", "x = v", "x free".
        // Merge sign prefixes into numbers first ("-inf" lexes as two tokens).
        for (std::size_t k = 0; k + 1 < toks.size();) {
            if (toks[k].kind == Token::Sign && toks[k + 1].kind == Token::Number) {
                toks[k + 1].value *= (toks[k].text == "-") ? -1.0 : 1.0;
                toks.erase(toks.begin() + static_cast<long>(k));
            } else {
                ++k;
            }
        }
        auto isFree = [&](const Token& t) { return t.kind == Token::Name && lower(t.text) == "free"; };
        if (toks.size() == 2 && toks[0].kind == Token::Name && isFree(toks[1])) {
            int j = variable(toks[0].text, toks[0].line);
            model_.set_bounds(j, -kInfinity, kInfinity);
            return;
        }
        if (toks.size() == 3 && toks[0].kind == Token::Name && toks[1].kind == Token::Sense &&
            toks[2].kind == Token::Number) {
            int j = variable(toks[0].text, toks[0].line);
            double v = toks[2].value;
            if (toks[1].text == "<=") {
                model_.set_bounds(j, model_.variables()[static_cast<std::size_t>(j)].lower, v);
            } else if (toks[1].text == ">=") {
                model_.set_bounds(j, v, model_.variables()[static_cast<std::size_t>(j)].upper);
            } else {
                model_.set_bounds(j, v, v);
            }
            return;
        }
        if (toks.size() == 5 && toks[0].kind == Token::Number && toks[1].kind == Token::Sense &&
            toks[1].text == "<=" && toks[2].kind == Token::Name &&
            toks[3].kind == Token::Sense && toks[3].text == "<=" &&
            toks[4].kind == Token::Number) {
            int j = variable(toks[2].text, toks[2].line);
            model_.set_bounds(j, toks[0].value, toks[4].value);
            return;
        }
        fail(toks[0].line, "unrecognized bounds line");
    }

    void finish_row() {
        fold_constant(rowLine_);
        if (section_ == Section::Objective && constant_ != 0.0) {
            fail(rowLine_, "constant terms in the objective are not supported");
        }
        if (!rowOpen_) {
            constant_ = 0.0;
            return;
        }
        if (!rowComplete_) {
            if (!terms_.empty() || constant_ != 0.0) fail(rowLine_, "constraint missing relation");
            rowOpen_ = false;
            return;
        }
        int r = model_.add_row(rowName_, rowSense_, rowRhs_);
        for (const Term& t : terms_) model_.add_term(r, t.variable, t.coefficient);
        terms_.clear();
        rowOpen_ = false;
        rowComplete_ = false;
    }

    MilpModel model_;
    std::unordered_map<std::string, int> varIndex_;
    Section section_ = Section::None;
    bool sawObjective_ = false;

    std::vector<Term> terms_;
    std::string rowName_;
    Sense rowSense_ = Sense::LessEqual;
    double rowRhs_ = 0.0;
    double constant_ = 0.0;
    double sign_ = 1.0;
    double pendingCoef_ = 1.0;
    bool haveCoef_ = false;
    int rowLine_ = 0;
    bool rowOpen_ = false;
    bool rowComplete_ = false;
};

} // namespace

std::string export_model(const MilpModel& model) {
    model.validate();
    bool renamed = false;
    std::vector<std::string> names = sanitized_names(model, renamed);

    std::string out;
    out += "\\ " + (model.name().empty() ? std::string("model") : model.name()) + "\n";
    if (renamed) out += "\\ note: some variable names were sanitized for LP format\n";
    out += "Minimize\n obj: ";
    append_terms(out, objective_terms(model), names);
    out += "\nSubject To\n";
    for (std::size_t r = 0; r < model.rows().size(); ++r) {
        const Row& row = model.rows()[r];
        out += ' ';
        out += row.name.empty() ? "c" + std::to_string(r) : row.name;
        out += ": ";
        append_terms(out, row.terms, names);
        switch (row.sense) {
            case Sense::LessEqual: out += " <= "; break;
            case Sense::Equal: out += " = "; break;
            case Sense::GreaterEqual: out += " >= "; break;
        }
        out += format_number(row.rhs);
        out += '\n';
    }
    out += "Bounds\n";
    for (std::size_t j = 0; j < model.variables().size(); ++j) {
        const Variable& v = model.variables()[j];
        out += ' ';
        if (v.lower == v.upper) {
            out += names[j] + " = " + format_number(v.lower);
        } else if (!std::isfinite(v.lower) && !std::isfinite(v.upper)) {
            out += names[j] + " free";
        } else {
            out += (std::isfinite(v.lower) ? format_number(v.lower) : "-inf");
            out += " <= " + names[j] + " <= ";
            out += (std::isfinite(v.upper) ? format_number(v.upper) : "+inf");
        }
        out += '\n';
    }
    bool anyIntegral = false;
    for (const Variable& v : model.variables()) anyIntegral = anyIntegral || v.integral;
    if (anyIntegral) {
        out += "Generals\n";
        for (std::size_t j = 0; j < model.variables().size(); ++j) {
            if (model.variables()[j].integral) out += ' ' + names[j] + '\n';
        }
    }
    out += "End\n";
    return out;
}

MilpModel parse_lp_text(const std::string& text) {
    LpParser parser;
    return parser.parse(text);
}

MilpModel load_lp_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open LP file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_lp_text(buf.str());
}

void save_lp_file(const MilpModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write LP file: " + path);
    out << export_model(model);
    if (!out) throw std::runtime_error("write failed for LP file: " + path);
}

} // namespace campopt::milp
