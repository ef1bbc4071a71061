#pragma once

// Line-by-line transliteration of the two reference Python import scripts, written with
// plain string operations and no extractor code. Python's `list(set(...))` has no defined
// order; first-seen order is used, which is what the declarative `dedup` stage promises.

#include <string>
#include <vector>

namespace import_scripts {

inline std::vector<std::string> split(const std::string& s, const std::string& sep, int maxsplit = -1) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (maxsplit < 0 || static_cast<int>(out.size()) < maxsplit) {
        auto hit = s.find(sep, pos);
        if (hit == std::string::npos) break;
        out.push_back(s.substr(pos, hit - pos));
        pos = hit + sep.size();
    }
    out.push_back(s.substr(pos));
    return out;
}

inline std::string strip(const std::string& s) {
    const char* ws = " \t\n\r\f\v";
    auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline bool in(const std::string& needle, const std::string& hay) { return hay.find(needle) != std::string::npos; }

// text = code_snippet.split('import')[1].strip() ...
inline std::string import_statement(const std::string& code_snippet) {
    std::string text = strip(split(code_snippet, "import").at(1));
    if (in(",", text)) {
        std::vector<std::string> all_imps;
        for (std::string imp : split(text, ",")) {
            imp = strip(split(strip(imp), " ")[0]);
            if (in(".", imp)) imp = split(imp, ".")[0];
            bool seen = false;
            for (const auto& x : all_imps) seen = seen || x == imp;
            if (!seen) all_imps.push_back(imp);
        }
        std::string extracted;
        for (std::size_t i = 0; i < all_imps.size(); ++i) extracted += (i ? ", " : "") + all_imps[i];
        return extracted;
    }
    std::string imp = strip(split(strip(text), " ")[0]);
    if (in(".", imp)) imp = split(imp, ".")[0];
    return imp;
}

// text = code_snippet.split('from', 1)[1].strip() ...
inline std::string import_from_statement(const std::string& code_snippet) {
    std::string text = strip(split(code_snippet, "from", 1).at(1));
    text = split(text, " import")[0];
    text = strip(text);
    if (in(".", text)) return split(text, ".")[0];
    return text;
}

}  // namespace import_scripts
