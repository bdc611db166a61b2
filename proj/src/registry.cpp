#include "hazmat/registry.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace hazmat {

namespace fs = std::filesystem;

std::string_view folder_name(FieldKind kind) noexcept {
    switch (kind) {
    case FieldKind::SId: return "S_id";
    case FieldKind::CompId: return "Comp_id";
    case FieldKind::ExmId: return "Exm_id";
    case FieldKind::EtId: return "Et_id";
    }
    return "";
}

std::size_t code_width(FieldKind kind) noexcept {
    return kind == FieldKind::SId || kind == FieldKind::CompId ? 8 : 4;
}

bool is_valid_code(FieldKind kind, std::string_view code) noexcept {
    return code.size() == code_width(kind) && std::all_of(code.begin(), code.end(), [](char c) {
               return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'F');
           });
}

namespace {

std::string read_info(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!text.empty() && text.back() == '\n') text.pop_back();
    if (!text.empty() && text.back() == '\r') text.pop_back();
    return text;
}

std::vector<fs::directory_entry> sorted_entries(const fs::path& dir) {
    std::vector<fs::directory_entry> out(fs::directory_iterator(dir), fs::directory_iterator{});
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path() < b.path(); });
    return out;
}

}  // namespace

Registry Registry::load(const fs::path& root) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw Error(Errc::MissingRoot, root.string() + " is not a directory");

    Registry reg;
    for (const auto& entry : sorted_entries(root)) {
        const std::string name = entry.path().filename().string();
        const bool known = std::any_of(kFieldKinds.begin(), kFieldKinds.end(),
                                       [&](FieldKind k) { return folder_name(k) == name; });
        if (!known) {
            reg.warnings_.push_back({entry.path(), RegistryWarning::Kind::UnknownFolder, "not a registry field folder; ignored"});
        }
    }

    for (FieldKind kind : kFieldKinds) {
        const fs::path dir = root / folder_name(kind);
        if (!fs::is_directory(dir, ec)) continue;
        for (const auto& entry : sorted_entries(dir)) {
            const fs::path& p = entry.path();
            if (!entry.is_regular_file() || p.extension() != ".txt") {
                reg.warnings_.push_back({p, RegistryWarning::Kind::NotTextFile, "not a .txt file; skipped"});
                continue;
            }
            const std::string code = p.stem().string();
            if (!is_valid_code(kind, code)) {
                reg.warnings_.push_back({p, RegistryWarning::Kind::MalformedCode,
                                         "'" + code + "' is not " + std::to_string(code_width(kind)) +
                                             " uppercase hex digits; skipped"});
                continue;
            }
            reg.entries_.emplace(Key{kind, code}, read_info(p));
        }
    }
    return reg;
}

std::optional<std::string> Registry::lookup(FieldKind kind, std::string_view code) const {
    const auto it = entries_.find(Key{kind, std::string(code)});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void Registry::insert(FieldKind kind, std::string code, std::string info) {
    if (!is_valid_code(kind, code)) {
        throw Error(Errc::MalformedCode, std::string(folder_name(kind)) + "/" + code);
    }
    entries_[Key{kind, std::move(code)}] = std::move(info);
}

void write_registry(const fs::path& root, const Registry& registry) {
    for (FieldKind kind : kFieldKinds) fs::create_directories(root / folder_name(kind));
    for (const auto& [key, info] : registry.entries()) {
        const fs::path file = root / folder_name(key.first) / (key.second + ".txt");
        std::ofstream out(file, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::Io, "cannot write " + file.string());
        out << info << '\n';
    }
}

Registry fixture_registry() {
    Registry reg;
    reg.insert(FieldKind::SId, "0000002C", "methane");
    reg.insert(FieldKind::SId, "0000002D", "ethane");
    reg.insert(FieldKind::SId, "0000002E", "propane");
    reg.insert(FieldKind::SId, "00000101", "LPG (propane-butane mixture)");
    reg.insert(FieldKind::SId, "00000200", "ammonium nitrate");
    reg.insert(FieldKind::SId, "00000300", "kerosene");
    reg.insert(FieldKind::CompId, "0000002C", "methane");
    reg.insert(FieldKind::CompId, "0000002D", "ethane");
    reg.insert(FieldKind::CompId, "0000002E", "propane");
    reg.insert(FieldKind::CompId, "0000002F", "butane");
    reg.insert(FieldKind::ExmId, "0001", "dry chemical powder");
    reg.insert(FieldKind::ExmId, "0002", "carbon dioxide");
    reg.insert(FieldKind::ExmId, "0003", "water spray (cooling only)");
    reg.insert(FieldKind::ExmId, "0004", "alcohol-resistant foam");
    reg.insert(FieldKind::EtId, "0001", "ADR label 2.1 - flammable gas");
    reg.insert(FieldKind::EtId, "0002", "ADR label 3 - flammable liquid");
    reg.insert(FieldKind::EtId, "0005", "ADR label 5.1 - oxidizing substance");
    reg.insert(FieldKind::EtId, "0006", "ADR label 6.1 - toxic substance");
    return reg;
}

InterventionSheet resolve_card(const HazmatCard& card, const Registry& registry) {
    InterventionSheet sheet;
    auto resolve = [&](FieldKind kind, const std::string& code, std::vector<std::string>* list, std::string* single) {
        if (auto info = registry.lookup(kind, code)) {
            if (list) list->push_back(std::move(*info));
            if (single) *single = std::move(*info);
        } else {
            sheet.unresolved_codes.push_back({kind, code});
        }
    };

    if (!card.s_id.empty()) resolve(FieldKind::SId, card.s_id, nullptr, &sheet.substance_name);
    for (const auto& code : card.comp_ids) resolve(FieldKind::CompId, code, &sheet.component_names, nullptr);
    for (const auto& code : card.exm_ids) resolve(FieldKind::ExmId, code, &sheet.extinguishers, nullptr);
    for (const auto& code : card.et_ids) resolve(FieldKind::EtId, code, &sheet.labels, nullptr);

    sheet.toxicity = card.is_toxic();
    sheet.kemler_no = card.kemler_no;
    sheet.onu_no = card.onu_no;
    sheet.ign_p = card.ign_p;
    sheet.sig_temp = card.sig_temp;
    sheet.b_pnt = card.b_pnt;
    sheet.m_pnt = card.m_pnt;
    sheet.s_dens = card.s_dens;
    sheet.operator_name = card.op_name;
    sheet.operator_phone = card.op_phone;
    sheet.t_id = card.t_id;
    sheet.t_rn = card.t_rn;
    return sheet;
}

std::string format_sheet(const InterventionSheet& sheet) {
    std::ostringstream os;
    auto list = [&os](std::string_view title, const std::vector<std::string>& items) {
        os << title << ":";
        if (items.empty()) os << " (none)";
        os << '\n';
        for (const auto& item : items) os << "  - " << item << '\n';
    };
    os << "=== INTERVENTION SHEET ===\n";
    os << "Truck:              " << sheet.t_id << " (" << sheet.t_rn << ")\n";
    os << "Operator:           " << sheet.operator_name << ", " << sheet.operator_phone << '\n';
    os << "Substance:          " << (sheet.substance_name.empty() ? "(unknown)" : sheet.substance_name) << '\n';
    os << "Toxic:              " << (sheet.toxicity ? "YES" : "no") << '\n';
    os << "Kemler no:          " << sheet.kemler_no << '\n';
    os << "UN (ONU) no:        " << sheet.onu_no << '\n';
    os << "Ignition point:     " << sheet.ign_p << " C\n";
    os << "Self-ignition temp: " << sheet.sig_temp << " C\n";
    os << "Boiling point:      " << sheet.b_pnt << " C\n";
    os << "Melting point:      " << sheet.m_pnt << " C\n";
    os << "Density:            " << sheet.s_dens << " kg/m3\n";
    list("Components", sheet.component_names);
    list("Extinguishing materials", sheet.extinguishers);
    list("Labels", sheet.labels);
    if (!sheet.unresolved_codes.empty()) {
        os << "UNRESOLVED:\n";
        for (const auto& u : sheet.unresolved_codes) {
            os << "  - " << folder_name(u.kind) << ' ' << u.code << '\n';
        }
    }
    return os.str();
}

}  // namespace hazmat
