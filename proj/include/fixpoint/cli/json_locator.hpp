#pragma once

// Maps JSON pointers ("/family/levels/1/alpha") to the 1-based source line
// where the value starts, so config errors can point at a line.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fixpoint::cli {

class JsonLocator {
public:
    JsonLocator() = default;

    explicit JsonLocator(std::string_view text) { scan(text); }

    /// Line of the value at `pointer`, falling back to the closest recorded
    /// ancestor. 0 when nothing matches.
    std::size_t line_of(std::string pointer) const {
        for (;;) {
            auto it = lines_.find(pointer);
            if (it != lines_.end()) return it->second;
            if (pointer.empty()) return 0;
            pointer.erase(pointer.rfind('/'));
        }
    }

private:
    struct Frame {
        bool object;
        std::string key;
        std::size_t index = 0;
        bool expecting_key = true;
    };

    static std::string escape(const std::string& token) {
        std::string out;
        for (char c : token) {
            if (c == '~') out += "~0";
            else if (c == '/') out += "~1";
            else out += c;
        }
        return out;
    }

    std::string current_path() const {
        std::string p;
        for (const auto& f : stack_) {
            p += '/';
            p += f.object ? escape(f.key) : std::to_string(f.index);
        }
        return p;
    }

    void record(std::size_t line) { lines_.emplace(current_path(), line); }

    void scan(std::string_view s) {
        std::size_t line = 1;
        std::size_t i = 0;
        auto read_string = [&]() {
            std::string out;
            ++i;  // opening quote
            while (i < s.size() && s[i] != '"') {
                if (s[i] == '\\' && i + 1 < s.size()) {
                    out += s[i + 1];
                    i += 2;
                    continue;
                }
                if (s[i] == '\n') ++line;
                out += s[i++];
            }
            ++i;  // closing quote
            return out;
        };
        while (i < s.size()) {
            const char c = s[i];
            switch (c) {
                case '\n': ++line; ++i; break;
                case ' ': case '\t': case '\r': case ':': ++i; break;
                case ',':
                    if (!stack_.empty()) {
                        if (stack_.back().object) stack_.back().expecting_key = true;
                        else ++stack_.back().index;
                    }
                    ++i;
                    break;
                case '{':
                    record(line);
                    stack_.push_back(Frame{true, {}, 0, true});
                    ++i;
                    break;
                case '[':
                    record(line);
                    stack_.push_back(Frame{false, {}, 0, false});
                    ++i;
                    break;
                case '}': case ']':
                    if (!stack_.empty()) stack_.pop_back();
                    ++i;
                    break;
                case '"':
                    if (!stack_.empty() && stack_.back().object && stack_.back().expecting_key) {
                        stack_.back().key = read_string();
                        stack_.back().expecting_key = false;
                    } else {
                        record(line);
                        read_string();
                    }
                    break;
                default:
                    record(line);
                    while (i < s.size() && s[i] != ',' && s[i] != '}' && s[i] != ']' && s[i] != '\n') ++i;
            }
        }
    }

    std::vector<Frame> stack_;
    std::map<std::string, std::size_t> lines_;
};

}  // namespace fixpoint::cli
