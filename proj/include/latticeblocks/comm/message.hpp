#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "latticeblocks/bytes.hpp"
#include "latticeblocks/comm/direction.hpp"
#include "latticeblocks/domain/patch.hpp"

namespace latticeblocks::comm {

/// Wire header of one block message: u64 receiver id, u8 direction, u32
/// payload length, little-endian, packed (13 bytes).
struct BlockMessageHeader {
  domain::BlockId receiver;
  CommDirection direction;  // side of the sending block the payload left through
  std::uint32_t payload_bytes;

  static constexpr std::size_t kEncodedSize = 8 + 1 + 4;
};

struct BlockMessage {
  BlockMessageHeader header;
  Bytes payload;
};

/// Non-owning view into a received process buffer.
struct BlockMessageView {
  BlockMessageHeader header;
  std::span<const std::byte> payload;
};

void encode_header(const BlockMessageHeader& header, ByteWriter& out);
void encode(const BlockMessage& message, ByteWriter& out);

/// Splits a process buffer into its block messages. Malformed headers and
/// payloads running past the end are protocol errors.
std::vector<BlockMessageView> parse_process_buffer(std::span<const std::byte> buffer);

}  // namespace latticeblocks::comm
