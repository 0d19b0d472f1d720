#include "clickpath/url.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

#include "clickpath/error.hpp"

namespace clickpath {
namespace {

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool valid_scheme(std::string_view s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
    });
}

bool is_utm_key(std::string_view key) {
    if (key.size() < 4) return false;
    return lower(key[0]) == 'u' && lower(key[1]) == 't' && lower(key[2]) == 'm' && key[3] == '_';
}

}  // namespace

bool looks_like_absolute_url(std::string_view s) {
    auto pos = s.find("://");
    return pos != std::string_view::npos && valid_scheme(s.substr(0, pos));
}

std::string normalize_url(std::string_view raw) {
    auto fail = [&] { return MalformedUrl(std::string(raw)); };

    auto scheme_end = raw.find("://");
    if (scheme_end == std::string_view::npos) throw fail();
    std::string_view scheme = raw.substr(0, scheme_end);
    if (!valid_scheme(scheme)) throw fail();
    for (char c : raw) {
        if (std::isspace(static_cast<unsigned char>(c)) || std::iscntrl(static_cast<unsigned char>(c)))
            throw fail();
    }

    std::string_view rest = raw.substr(scheme_end + 3);
    if (auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);

    auto authority_end = rest.find_first_of("/?");
    std::string_view authority = rest.substr(0, authority_end);
    rest = authority_end == std::string_view::npos ? std::string_view{} : rest.substr(authority_end);

    std::string_view userinfo;
    if (auto at = authority.rfind('@'); at != std::string_view::npos) {
        userinfo = authority.substr(0, at + 1);
        authority = authority.substr(at + 1);
    }
    std::string_view host = authority;
    if (auto colon = authority.rfind(':');
        colon != std::string_view::npos && authority.find(']') == std::string_view::npos) {
        host = authority.substr(0, colon);
    } else if (auto bracket = authority.find(']'); bracket != std::string_view::npos) {
        host = authority.substr(0, bracket + 1);
    }
    if (host.empty() || host == "[]") throw fail();

    std::string_view path = rest.substr(0, rest.find('?'));
    std::string_view query;
    if (auto q = rest.find('?'); q != std::string_view::npos) query = rest.substr(q + 1);

    std::string out;
    out.reserve(raw.size());
    for (char c : scheme) out.push_back(lower(c));
    out += "://";
    out += userinfo;
    for (char c : authority) out.push_back(lower(c));
    out += path.empty() ? std::string_view{"/"} : path;

    std::vector<std::string_view> params;
    while (!query.empty()) {
        auto amp = query.find('&');
        std::string_view param = query.substr(0, amp);
        query = amp == std::string_view::npos ? std::string_view{} : query.substr(amp + 1);
        if (param.empty()) continue;
        if (is_utm_key(param.substr(0, param.find('=')))) continue;
        params.push_back(param);
    }
    std::stable_sort(params.begin(), params.end(), [](std::string_view a, std::string_view b) {
        return a.substr(0, a.find('=')) < b.substr(0, b.find('='));
    });
    for (std::size_t i = 0; i < params.size(); ++i) {
        out.push_back(i == 0 ? '?' : '&');
        out += params[i];
    }
    return out;
}

}  // namespace clickpath
