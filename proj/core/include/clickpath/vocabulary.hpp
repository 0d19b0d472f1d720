#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "clickpath/action_path.hpp"
#include "clickpath/behavior.hpp"
#include "clickpath/linearize.hpp"

namespace clickpath {

/// Reserved token ids. Real URLs start at kFirstUrlId.
enum Mark : TokenId {
    kPad = 0,
    kSoa = 1,
    kCoi = 2,
    kSop = 3,
    kEoaTrg = 4,
    kEoaPur = 5,
    kEoaExp = 6,
};

inline constexpr TokenId kMarkCount = 7;
inline constexpr TokenId kFirstUrlId = kMarkCount;
inline constexpr std::array<std::string_view, kMarkCount> kMarkNames = {
    "PAD", "SOA", "COI", "SOP", "EOA_TRG", "EOA_PUR", "EOA_EXP"};

inline constexpr bool is_mark(TokenId id) { return id < kMarkCount; }
inline constexpr bool is_eoa(TokenId id) { return id >= kEoaTrg && id <= kEoaExp; }

TokenId eoa_for(Behavior b);
std::optional<Behavior> behavior_for(TokenId eoa);

class Vocabulary {
public:
    Vocabulary() = default;

    /// Sorts and de-duplicates `urls`, numbering them from kFirstUrlId.
    static Vocabulary build(std::vector<std::string> urls);
    static Vocabulary build(std::span<const LinearizedSession> sessions);

    std::size_t size() const { return kMarkCount + urls_.size(); }
    std::size_t url_count() const { return urls_.size(); }
    const std::vector<std::string>& urls() const { return urls_; }

    std::optional<TokenId> find(std::string_view url) const;
    /// Throws DataError for unknown URLs.
    TokenId id_of(std::string_view url) const;
    /// Mark names for ids < 7, URL strings otherwise. Throws IndexOutOfRange.
    std::string token(TokenId id) const;

    /// Maps visit URLs to ids. Throws DataError for unknown URLs.
    ActionPath encode(const LinearizedSession& session) const;

    nlohmann::json to_json() const;
    static Vocabulary from_json(const nlohmann::json& j);

    bool operator==(const Vocabulary& other) const { return urls_ == other.urls_; }

private:
    std::vector<std::string> urls_;
    std::unordered_map<std::string, TokenId> index_;
};

}  // namespace clickpath
