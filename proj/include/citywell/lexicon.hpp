#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "citywell/csv.hpp"
#include "citywell/error.hpp"

namespace citywell {

// LIWC-style tokenization: URLs stripped, then maximal runs of ASCII
// letters/digits/apostrophes, lowercased.
inline std::vector<std::string> tokenize(std::string_view text) {
    auto is_token_char = [](unsigned char c) {
        return std::isalnum(c) != 0 || c == '\'';
    };
    std::vector<std::string> tokens;
    size_t i = 0;
    size_t n = text.size();
    auto starts_url = [&](size_t pos) {
        auto match = [&](std::string_view prefix) {
            if (pos + prefix.size() > n) return false;
            for (size_t k = 0; k < prefix.size(); ++k)
                if (std::tolower(static_cast<unsigned char>(text[pos + k])) != prefix[k]) return false;
            return true;
        };
        if (pos > 0 && is_token_char(static_cast<unsigned char>(text[pos - 1]))) return false;
        return match("http://") || match("https://") || match("www.");
    };
    std::string cur;
    while (i < n) {
        if (starts_url(i)) {
            while (i < n && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
            continue;
        }
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (is_token_char(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
        ++i;
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

struct CategoryScore {
    std::string category;
    double percent = 0.0;  // percent of tokens matching, in [0, 100]
};

// Category lexicon with exact words and trailing-wildcard prefixes.
// Matching walks a single trie and reports all categories per token at once.
class Lexicon {
public:
    // file format: one "category,entry" line each; trailing '*' marks a prefix
    static Lexicon load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw InputError("cannot open lexicon: " + path);
        Lexicon lex;
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || line[0] == '#') continue;
            auto fields = csv::split_line(line);
            if (fields.size() != 2)
                throw InputError("lexicon " + path + " line " + std::to_string(line_no) +
                                 ": expected 'category,entry'");
            lex.add(fields[0], fields[1]);
        }
        lex.finalize();
        return lex;
    }

    void add(const std::string& category, const std::string& entry) {
        if (entry.empty()) throw InputError("empty lexicon entry in category '" + category + "'");
        bool prefix = entry.back() == '*';
        std::string word = prefix ? entry.substr(0, entry.size() - 1) : entry;
        if (word.empty()) throw InputError("lexicon entry '*' has no prefix");
        if (word.find('*') != std::string::npos)
            throw InputError("lexicon entry '" + entry + "': wildcard allowed only at the end");
        std::transform(word.begin(), word.end(), word.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        int cat = category_index_or_add(category);
        entries_.push_back({word, cat, prefix});
        finalized_ = false;
    }

    void finalize() {
        size_t masks = mask_words();
        nodes_.clear();
        nodes_.push_back(Node{});
        nodes_[0].exact.assign(masks, 0);
        nodes_[0].prefix.assign(masks, 0);
        for (const auto& e : entries_) {
            size_t node = 0;
            for (char c : e.word) {
                node = child(node, c, masks);
            }
            auto& target = e.is_prefix ? nodes_[node].prefix : nodes_[node].exact;
            target[static_cast<size_t>(e.category) / 64] |= 1ull << (e.category % 64);
        }
        finalized_ = true;
    }

    const std::vector<std::string>& categories() const { return categories_; }

    int category_index(const std::string& name) const {
        auto it = category_ids_.find(name);
        return it == category_ids_.end() ? -1 : it->second;
    }

    bool has_category(const std::string& name) const { return category_index(name) >= 0; }

    // per-category match flags for one token
    void match_token(std::string_view token, std::vector<uint64_t>& out) const {
        size_t masks = mask_words();
        out.assign(masks, 0);
        size_t node = 0;
        for (size_t i = 0; i < token.size(); ++i) {
            int next = find_child(node, token[i]);
            if (next < 0) return;
            node = static_cast<size_t>(next);
            for (size_t w = 0; w < masks; ++w) out[w] |= nodes_[node].prefix[w];
        }
        for (size_t w = 0; w < masks; ++w) out[w] |= nodes_[node].exact[w];
    }

    bool token_in_category(std::string_view token, int category) const {
        std::vector<uint64_t> m;
        match_token(token, m);
        return (m[static_cast<size_t>(category) / 64] >> (category % 64)) & 1;
    }

    // percent of tokens matching each category
    std::vector<double> score_all(const std::vector<std::string>& tokens) const {
        std::vector<double> counts(categories_.size(), 0.0);
        std::vector<uint64_t> m;
        for (const auto& tok : tokens) {
            match_token(tok, m);
            for (size_t c = 0; c < categories_.size(); ++c)
                if ((m[c / 64] >> (c % 64)) & 1) counts[c] += 1.0;
        }
        if (!tokens.empty()) {
            double scale = 100.0 / static_cast<double>(tokens.size());
            for (auto& v : counts) v *= scale;
        }
        return counts;  // all zeros for an empty token list
    }

    struct Entry {
        std::string word;
        int category;
        bool is_prefix;
    };
    const std::vector<Entry>& entries() const { return entries_; }

private:
    struct Node {
        // children kept sorted by character
        std::vector<std::pair<char, uint32_t>> children;
        std::vector<uint64_t> exact;
        std::vector<uint64_t> prefix;
    };

    size_t mask_words() const { return (categories_.size() + 63) / 64; }

    int category_index_or_add(const std::string& name) {
        auto it = category_ids_.find(name);
        if (it != category_ids_.end()) return it->second;
        int id = static_cast<int>(categories_.size());
        categories_.push_back(name);
        category_ids_.emplace(name, id);
        return id;
    }

    int find_child(size_t node, char c) const {
        const auto& ch = nodes_[node].children;
        auto it = std::lower_bound(ch.begin(), ch.end(), c,
                                   [](const auto& p, char k) { return p.first < k; });
        if (it == ch.end() || it->first != c) return -1;
        return static_cast<int>(it->second);
    }

    size_t child(size_t node, char c, size_t masks) {
        int f = find_child(node, c);
        if (f >= 0) return static_cast<size_t>(f);
        uint32_t idx = static_cast<uint32_t>(nodes_.size());
        Node fresh;
        fresh.exact.assign(masks, 0);
        fresh.prefix.assign(masks, 0);
        nodes_.push_back(std::move(fresh));
        auto& ch = nodes_[node].children;
        ch.insert(std::upper_bound(ch.begin(), ch.end(), c,
                                   [](char k, const auto& p) { return k < p.first; }),
                  {c, idx});
        return idx;
    }

    std::vector<std::string> categories_;
    std::map<std::string, int> category_ids_;
    std::vector<Entry> entries_;
    std::vector<Node> nodes_;
    bool finalized_ = false;
};

// percent = 100 * matching / total; empty token lists score 0
inline CategoryScore score_text(const std::vector<std::string>& tokens, const Lexicon& lexicon,
                                const std::string& category) {
    int cat = lexicon.category_index(category);
    if (cat < 0) throw InputError("unknown lexicon category '" + category + "'");
    if (tokens.empty()) return {category, 0.0};
    double matches = 0;
    for (const auto& tok : tokens)
        if (lexicon.token_in_category(tok, cat)) matches += 1.0;
    return {category, 100.0 * matches / static_cast<double>(tokens.size())};
}

}  // namespace citywell
