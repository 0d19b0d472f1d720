#pragma once

#include <string>
#include <string_view>

namespace clickpath {

/// Canonicalizes an absolute URL: lowercases scheme and host, drops the
/// fragment and every utm_* query parameter, sorts the remaining query
/// parameters by key (stable), and maps an empty path to "/".
/// Throws MalformedUrl.
std::string normalize_url(std::string_view raw);

/// True when `s` has the shape scheme://host..., i.e. normalize_url applies.
bool looks_like_absolute_url(std::string_view s);

}  // namespace clickpath
