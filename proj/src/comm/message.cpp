#include "latticeblocks/comm/message.hpp"

#include <string>

namespace latticeblocks::comm {

std::string name(CommDirection d) {
  static const char* axes = "xyz";
  std::string out;
  const auto& e = vector(d);
  for (int a = 0; a < 3; ++a) {
    if (e[a] == 0) continue;
    out += e[a] > 0 ? '+' : '-';
    out += axes[a];
  }
  return out;
}

void encode_header(const BlockMessageHeader& header, ByteWriter& out) {
  out.put(header.receiver.value);
  out.put(std::uint8_t(header.direction));
  out.put(header.payload_bytes);
}

void encode(const BlockMessage& message, ByteWriter& out) {
  encode_header(message.header, out);
  out.put_bytes(message.payload);
}

std::vector<BlockMessageView> parse_process_buffer(std::span<const std::byte> buffer) {
  std::vector<BlockMessageView> out;
  ByteReader reader(buffer);
  while (!reader.done()) {
    BlockMessageHeader h;
    h.receiver.value = reader.get<std::uint64_t>();
    const auto dir = reader.get<std::uint8_t>();
    if (dir < 1 || dir > kDirectionCount) {
      throw ProtocolError("message for " + h.receiver.str() + " carries invalid direction " + std::to_string(dir));
    }
    h.direction = CommDirection(dir);
    h.payload_bytes = reader.get<std::uint32_t>();
    if (reader.remaining() < h.payload_bytes) {
      throw ProtocolError("truncated payload for " + h.receiver.str() + ": header announces " +
                          std::to_string(h.payload_bytes) + " bytes, " + std::to_string(reader.remaining()) +
                          " remain");
    }
    out.push_back({h, reader.get_bytes(h.payload_bytes)});
  }
  return out;
}

}  // namespace latticeblocks::comm
