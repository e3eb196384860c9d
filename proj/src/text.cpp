#include "entail/text.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace entail {

namespace {
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
}  // namespace

std::string trim(std::string_view s)
{
    size_t b = 0;
    size_t e = s.size();
    while (b < e && is_space(s[b])) {
        ++b;
    }
    while (e > b && is_space(s[e - 1])) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

std::string normalize_sentence(std::string_view sentence)
{
    std::string out;
    out.reserve(sentence.size());
    bool pending_space = false;
    for (char c : sentence) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (!out.empty() && out.back() == '.') {
        out.pop_back();
        while (!out.empty() && out.back() == ' ') {
            out.pop_back();
        }
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc) != 0) {
            cur.push_back(static_cast<char>(std::tolower(uc)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) {
        tokens.push_back(std::move(cur));
    }
    return tokens;
}

double token_f1(std::string_view a, std::string_view b)
{
    auto ta = tokenize(a);
    auto tb = tokenize(b);
    if (ta.empty() && tb.empty()) {
        return 1.0;
    }
    if (ta.empty() || tb.empty()) {
        return 0.0;
    }
    std::map<std::string, int> counts;
    for (auto const& t : ta) {
        ++counts[t];
    }
    int common = 0;
    for (auto const& t : tb) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    }
    if (common == 0) {
        return 0.0;
    }
    double p = static_cast<double>(common) / static_cast<double>(tb.size());
    double r = static_cast<double>(common) / static_cast<double>(ta.size());
    return 2.0 * p * r / (p + r);
}

}  // namespace entail
