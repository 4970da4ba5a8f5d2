#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace metafill {

using Tokens = std::vector<std::string>;

// Whitespace split + ASCII lower-casing. Shared by graph names, edge-type
// names and every template built on top of them.
Tokens tokenize(std::string_view text);

std::string join(const Tokens& tokens, std::string_view sep = " ");

Tokens concat(const Tokens& a, const Tokens& b);

}  // namespace metafill
