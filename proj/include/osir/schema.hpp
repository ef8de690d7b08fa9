#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace osir {

inline constexpr std::size_t kNumAttributes = 41;

enum class AttrKind { numeric, categorical, binary };

struct AttrInfo {
  std::string_view name;
  AttrKind kind;
};

// KDD'99 connection-record schema: 41 attributes followed by the label.
// protocol_type, service and flag are token-valued; land, logged_in,
// is_host_login and is_guest_login are 0/1.
inline constexpr std::array<AttrInfo, kNumAttributes> kAttributes = {{
    {"duration", AttrKind::numeric},
    {"protocol_type", AttrKind::categorical},
    {"service", AttrKind::categorical},
    {"flag", AttrKind::categorical},
    {"src_bytes", AttrKind::numeric},
    {"dst_bytes", AttrKind::numeric},
    {"land", AttrKind::binary},
    {"wrong_fragment", AttrKind::numeric},
    {"urgent", AttrKind::numeric},
    {"hot", AttrKind::numeric},
    {"num_failed_logins", AttrKind::numeric},
    {"logged_in", AttrKind::binary},
    {"num_compromised", AttrKind::numeric},
    {"root_shell", AttrKind::numeric},
    {"su_attempted", AttrKind::numeric},
    {"num_root", AttrKind::numeric},
    {"num_file_creations", AttrKind::numeric},
    {"num_shells", AttrKind::numeric},
    {"num_access_files", AttrKind::numeric},
    {"num_outbound_cmds", AttrKind::numeric},
    {"is_host_login", AttrKind::binary},
    {"is_guest_login", AttrKind::binary},
    {"count", AttrKind::numeric},
    {"srv_count", AttrKind::numeric},
    {"serror_rate", AttrKind::numeric},
    {"srv_serror_rate", AttrKind::numeric},
    {"rerror_rate", AttrKind::numeric},
    {"srv_rerror_rate", AttrKind::numeric},
    {"same_srv_rate", AttrKind::numeric},
    {"diff_srv_rate", AttrKind::numeric},
    {"srv_diff_host_rate", AttrKind::numeric},
    {"dst_host_count", AttrKind::numeric},
    {"dst_host_srv_count", AttrKind::numeric},
    {"dst_host_same_srv_rate", AttrKind::numeric},
    {"dst_host_diff_srv_rate", AttrKind::numeric},
    {"dst_host_same_src_port_rate", AttrKind::numeric},
    {"dst_host_srv_diff_host_rate", AttrKind::numeric},
    {"dst_host_serror_rate", AttrKind::numeric},
    {"dst_host_srv_serror_rate", AttrKind::numeric},
    {"dst_host_rerror_rate", AttrKind::numeric},
    {"dst_host_srv_rerror_rate", AttrKind::numeric},
}};

// Positions of the token-valued attributes (protocol_type, service, flag).
inline constexpr std::array<std::size_t, 3> kCategoricalAttributes = {1, 2, 3};

inline constexpr bool is_categorical(std::size_t attr) {
  return attr == 1 || attr == 2 || attr == 3;
}

// Index into kCategoricalAttributes, attr must be categorical.
inline constexpr std::size_t categorical_slot(std::size_t attr) {
  return attr == 1 ? 0 : attr == 2 ? 1 : 2;
}

}  // namespace osir
