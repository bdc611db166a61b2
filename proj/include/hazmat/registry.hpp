#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hazmat/card.hpp"

namespace hazmat {

enum class FieldKind { SId, CompId, ExmId, EtId };

inline constexpr std::array<FieldKind, 4> kFieldKinds{FieldKind::SId, FieldKind::CompId, FieldKind::ExmId,
                                                      FieldKind::EtId};

// Folder name on disk: S_id, Comp_id, Exm_id, Et_id.
std::string_view folder_name(FieldKind kind) noexcept;
std::size_t code_width(FieldKind kind) noexcept;
bool is_valid_code(FieldKind kind, std::string_view code) noexcept;

struct RegistryWarning {
    enum class Kind { UnknownFolder, NotTextFile, MalformedCode };
    std::filesystem::path path;
    Kind kind;
    std::string detail;
};

// In-memory copy of the offline code database:
//   <root>/S_id/<8-hex>.txt, <root>/Comp_id/<8-hex>.txt,
//   <root>/Exm_id/<4-hex>.txt, <root>/Et_id/<4-hex>.txt
// Immutable after load, so concurrent lookups need no locking.
class Registry {
public:
    using Key = std::pair<FieldKind, std::string>;

    Registry() = default;

    // Throws MissingRoot. Malformed names and unknown folders become warnings.
    static Registry load(const std::filesystem::path& root);

    // Exact match; nullopt is the NotFound answer.
    std::optional<std::string> lookup(FieldKind kind, std::string_view code) const;

    std::size_t size() const noexcept { return entries_.size(); }
    const std::map<Key, std::string>& entries() const noexcept { return entries_; }
    const std::vector<RegistryWarning>& warnings() const noexcept { return warnings_; }

    // Builder for fixtures and tests; rejects invalid codes.
    void insert(FieldKind kind, std::string code, std::string info);

private:
    std::map<Key, std::string> entries_;
    std::vector<RegistryWarning> warnings_;
};

// Writes every entry as <root>/<folder>/<code>.txt (content + '\n').
void write_registry(const std::filesystem::path& root, const Registry& registry);

// Reference-data set shipped with `registry init`.
Registry fixture_registry();

struct UnresolvedCode {
    FieldKind kind;
    std::string code;

    friend bool operator==(const UnresolvedCode&, const UnresolvedCode&) = default;
};

struct InterventionSheet {
    std::string substance_name;
    std::vector<std::string> component_names;
    std::vector<std::string> extinguishers;
    std::vector<std::string> labels;
    bool toxicity = false;
    std::string kemler_no;
    std::string onu_no;
    std::string ign_p;
    std::string sig_temp;
    std::string b_pnt;
    std::string m_pnt;
    std::string s_dens;
    std::string operator_name;
    std::string operator_phone;
    std::uint64_t t_id = 0;
    std::string t_rn;
    std::vector<UnresolvedCode> unresolved_codes;
};

// Offline resolution of every code on the card. Codes without an entry go to
// unresolved_codes; none are dropped.
InterventionSheet resolve_card(const HazmatCard& card, const Registry& registry);

std::string format_sheet(const InterventionSheet& sheet);

}  // namespace hazmat
