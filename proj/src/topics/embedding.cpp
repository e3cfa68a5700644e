#include <charconv>
#include <cmath>
#include <fstream>

#include "stereocrawl/error.hpp"
#include "stereocrawl/topics.hpp"

namespace stereocrawl {

namespace {

std::vector<std::string_view> fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

bool is_count(std::string_view s) {
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

class Loader {
public:
    Loader(EmbeddingTable& table, const std::unordered_set<std::string>* vocabulary)
        : table_(table), vocabulary_(vocabulary) {}

    void line(std::string_view text) {
        ++line_no_;
        const auto f = fields(text);
        if (f.empty()) return;
        if (line_no_ == 1 && f.size() == 2 && is_count(f[0]) && is_count(f[1])) return;
        const std::string word = fold_case(f[0]);
        if (vocabulary_ && !vocabulary_->count(word)) {
            check_width(f.size() - 1);
            return;
        }
        values_.clear();
        for (std::size_t i = 1; i < f.size(); ++i) {
            float v = 0.0f;
            const auto res = std::from_chars(f[i].data(), f[i].data() + f[i].size(), v);
            if (res.ec != std::errc() || res.ptr != f[i].data() + f[i].size() || !std::isfinite(v)) {
                throw Error(ErrorCode::InvalidConfig, "word-vector line " + std::to_string(line_no_) +
                                                          ": bad number \"" + std::string(f[i]) + "\"");
            }
            values_.push_back(v);
        }
        check_width(values_.size());
        if (table_.find(word).empty()) table_.add(word, values_);
    }

    std::size_t width() const { return width_; }

private:
    void check_width(std::size_t width) {
        if (width == 0) {
            throw Error(ErrorCode::DimensionMismatch,
                        "word-vector line " + std::to_string(line_no_) + " has no values");
        }
        if (width_ == 0) width_ = width;
        if (width != width_) {
            throw Error(ErrorCode::DimensionMismatch,
                        "word-vector line " + std::to_string(line_no_) + " has " +
                            std::to_string(width) + " values, expected " + std::to_string(width_));
        }
    }

    EmbeddingTable& table_;
    const std::unordered_set<std::string>* vocabulary_;
    std::vector<float> values_;
    std::size_t line_no_ = 0;
    std::size_t width_ = 0;
};

}  // namespace

EmbeddingTable EmbeddingTable::parse(std::string_view text,
                                     const std::unordered_set<std::string>* vocabulary) {
    EmbeddingTable table;
    Loader loader(table, vocabulary);
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        loader.line(text.substr(start, end - start));
        start = end + 1;
    }
    table.dimension_ = loader.width();
    return table;
}

EmbeddingTable EmbeddingTable::load(const std::string& path,
                                    const std::unordered_set<std::string>* vocabulary) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open word-vector file " + path);
    EmbeddingTable table;
    Loader loader(table, vocabulary);
    std::string line;
    while (std::getline(in, line)) loader.line(line);
    table.dimension_ = loader.width();
    return table;
}

void EmbeddingTable::add(std::string_view word, std::span<const float> vector) {
    if (dimension_ == 0) dimension_ = vector.size();
    if (vector.size() != dimension_ || vector.empty()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "vector for \"" + std::string(word) + "\" has " + std::to_string(vector.size()) +
                        " values, table dimension is " + std::to_string(dimension_));
    }
    const std::string key = fold_case(word);
    if (index_.count(key)) return;
    index_.emplace(key, data_.size() / dimension_);
    data_.insert(data_.end(), vector.begin(), vector.end());
}

std::span<const float> EmbeddingTable::find(std::string_view word) const {
    const auto it = index_.find(fold_case(word));
    if (it == index_.end()) return {};
    return std::span<const float>(data_).subspan(it->second * dimension_, dimension_);
}

Embedding embed(std::span<const std::string> tokens, const EmbeddingTable& table) {
    Embedding e;
    e.vector.assign(table.dimension(), 0.0);
    std::size_t found = 0;
    for (const auto& t : tokens) {
        const auto v = table.find(t);
        if (v.empty()) continue;
        for (std::size_t d = 0; d < v.size(); ++d) e.vector[d] += v[d];
        ++found;
    }
    if (found == 0) {
        e.oov = true;
        return e;
    }
    for (double& x : e.vector) x /= static_cast<double>(found);
    return e;
}

}  // namespace stereocrawl
