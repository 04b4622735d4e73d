#include "latticeblocks/comm/transport.hpp"

#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "latticeblocks/errors.hpp"

namespace latticeblocks::comm {

// ---------------------------------------------------------------------------
// In-process mailboxes

class InProcessTransport : public Transport {
 public:
  InProcessTransport(InProcessHub& hub, int rank) : hub_(hub), rank_(rank) {}

  int rank() const override { return rank_; }
  int size() const override { return hub_.size(); }

  void send(int dest, Bytes bytes) override {
    check_rank(dest);
    const auto n = bytes.size();
    auto& box = hub_.box(rank_, dest);
    {
      std::lock_guard lock(box.mutex);
      box.queue.push_back(std::move(bytes));
    }
    box.ready.notify_one();
    count_send(n);
  }

  Bytes receive(int source) override {
    check_rank(source);
    auto& box = hub_.box(source, rank_);
    std::unique_lock lock(box.mutex);
    box.ready.wait(lock, [&] { return !box.queue.empty() || hub_.aborted_.load(); });
    if (box.queue.empty()) {
      std::lock_guard reason_lock(hub_.abort_mutex_);
      throw TransportError("rank " + std::to_string(rank_) + " receive from rank " + std::to_string(source) +
                           " aborted: " + hub_.abort_reason_);
    }
    Bytes out = std::move(box.queue.front());
    box.queue.pop_front();
    count_receive();
    return out;
  }

 private:
  void check_rank(int r) const {
    if (r < 0 || r >= hub_.size()) throw TransportError("rank " + std::to_string(r) + " out of range");
  }

  InProcessHub& hub_;
  int rank_;
};

InProcessHub::InProcessHub(int size) : size_(size) {
  if (size <= 0) throw ConfigError("in-process transport needs at least one rank");
  boxes_.reserve(std::size_t(size) * size);
  for (int i = 0; i < size * size; ++i) boxes_.push_back(std::make_unique<Mailbox>());
}

std::unique_ptr<Transport> InProcessHub::endpoint(int rank) {
  if (rank < 0 || rank >= size_) throw TransportError("rank " + std::to_string(rank) + " out of range");
  return std::make_unique<InProcessTransport>(*this, rank);
}

void InProcessHub::abort(const std::string& reason) {
  {
    std::lock_guard lock(abort_mutex_);
    if (abort_reason_.empty()) abort_reason_ = reason;
  }
  aborted_ = true;
  for (auto& box : boxes_) {
    std::lock_guard lock(box->mutex);
    box->ready.notify_all();
  }
}

// ---------------------------------------------------------------------------
// Unix-domain sockets

namespace {

std::string errno_text() { return std::strerror(errno); }

sockaddr_un socket_address(const std::filesystem::path& path) {
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  const auto s = path.string();
  if (s.size() >= sizeof(addr.sun_path)) throw TransportError("socket path too long: " + s);
  std::memcpy(addr.sun_path, s.c_str(), s.size() + 1);
  return addr;
}

void write_all(int fd, const std::byte* data, std::size_t n) {
  while (n > 0) {
    const auto w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw TransportError("socket write failed: " + errno_text());
    }
    data += w;
    n -= std::size_t(w);
  }
}

// Returns false on clean EOF before the first byte.
bool read_all(int fd, std::byte* data, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const auto r = ::read(fd, data + got, n - got);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw TransportError("socket read failed: " + errno_text());
    }
    if (r == 0) {
      if (got == 0) return false;
      throw TransportError("connection closed mid-frame");
    }
    got += std::size_t(r);
  }
  return true;
}

}  // namespace

SocketTransport::SocketTransport(int rank, int size)
    : rank_(rank), size_(size), out_fds_(std::size_t(size), -1), in_fds_(std::size_t(size), -1) {
  for (int i = 0; i < size; ++i) inboxes_.push_back(std::make_unique<Inbox>());
}

std::unique_ptr<SocketTransport> SocketTransport::connect(const std::filesystem::path& dir, int rank, int size,
                                                          std::chrono::milliseconds timeout) {
  if (rank < 0 || rank >= size) throw TransportError("rank " + std::to_string(rank) + " out of range");
  std::unique_ptr<SocketTransport> t(new SocketTransport(rank, size));

  t->socket_path_ = dir / ("rank" + std::to_string(rank) + ".sock");
  t->listen_fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
  if (t->listen_fd_ < 0) throw TransportError("socket(): " + errno_text());
  auto addr = socket_address(t->socket_path_);
  std::filesystem::remove(t->socket_path_);
  if (::bind(t->listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw TransportError("bind " + t->socket_path_.string() + ": " + errno_text());
  }
  if (::listen(t->listen_fd_, size) != 0) throw TransportError("listen: " + errno_text());

  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (int peer = 0; peer < size; ++peer) {
    if (peer == rank) continue;
    const auto peer_addr = socket_address(dir / ("rank" + std::to_string(peer) + ".sock"));
    for (;;) {
      const int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
      if (fd < 0) throw TransportError("socket(): " + errno_text());
      if (::connect(fd, reinterpret_cast<const sockaddr*>(&peer_addr), sizeof(peer_addr)) == 0) {
        const auto hello = std::uint32_t(rank);
        ByteWriter w;
        w.put(hello);
        const auto bytes = w.take();
        write_all(fd, bytes.data(), bytes.size());
        t->out_fds_[std::size_t(peer)] = fd;
        break;
      }
      ::close(fd);
      if (std::chrono::steady_clock::now() > deadline) {
        throw TransportError("rank " + std::to_string(rank) + " timed out connecting to rank " +
                             std::to_string(peer));
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
  }

  for (int accepted = 0; accepted < size - 1; ++accepted) {
    const int fd = ::accept(t->listen_fd_, nullptr, nullptr);
    if (fd < 0) throw TransportError("accept: " + errno_text());
    std::array<std::byte, 4> raw;
    if (!read_all(fd, raw.data(), raw.size())) throw TransportError("peer closed during handshake");
    ByteReader r(raw);
    const int peer = int(r.get<std::uint32_t>());
    if (peer < 0 || peer >= size || peer == rank || t->in_fds_[std::size_t(peer)] != -1) {
      throw TransportError("bad handshake from rank " + std::to_string(peer));
    }
    t->in_fds_[std::size_t(peer)] = fd;
  }
  for (int peer = 0; peer < size; ++peer) {
    if (peer == rank) continue;
    t->readers_.emplace_back(&SocketTransport::reader_loop, t.get(), peer, t->in_fds_[std::size_t(peer)]);
  }
  return t;
}

SocketTransport::~SocketTransport() {
  for (int fd : out_fds_) {
    if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
  }
  for (int fd : in_fds_) {
    if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& th : readers_) th.join();
  for (int fd : out_fds_) {
    if (fd >= 0) ::close(fd);
  }
  for (int fd : in_fds_) {
    if (fd >= 0) ::close(fd);
  }
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    std::error_code ec;
    std::filesystem::remove(socket_path_, ec);
  }
}

void SocketTransport::reader_loop(int peer, int fd) {
  auto& inbox = *inboxes_[std::size_t(peer)];
  try {
    for (;;) {
      std::array<std::byte, 8> raw;
      if (!read_all(fd, raw.data(), raw.size())) break;
      ByteReader r(raw);
      const auto n = r.get<std::uint64_t>();
      Bytes frame(n);
      if (n > 0 && !read_all(fd, frame.data(), frame.size())) throw TransportError("connection closed mid-frame");
      {
        std::lock_guard lock(inbox.mutex);
        inbox.queue.push_back(std::move(frame));
      }
      inbox.ready.notify_one();
    }
  } catch (const std::exception& e) {
    std::lock_guard lock(inbox.mutex);
    inbox.error = e.what();
  }
  {
    std::lock_guard lock(inbox.mutex);
    inbox.closed = true;
  }
  inbox.ready.notify_all();
}

void SocketTransport::send(int dest, Bytes bytes) {
  if (dest < 0 || dest >= size_) throw TransportError("rank " + std::to_string(dest) + " out of range");
  const auto n = bytes.size();
  if (dest == rank_) {
    auto& inbox = *inboxes_[std::size_t(dest)];
    {
      std::lock_guard lock(inbox.mutex);
      inbox.queue.push_back(std::move(bytes));
    }
    inbox.ready.notify_one();
  } else {
    ByteWriter w;
    w.put(std::uint64_t(n));
    const auto prefix = w.take();
    const int fd = out_fds_[std::size_t(dest)];
    try {
      write_all(fd, prefix.data(), prefix.size());
      write_all(fd, bytes.data(), bytes.size());
    } catch (const TransportError& e) {
      throw TransportError("rank " + std::to_string(rank_) + " -> rank " + std::to_string(dest) + ": " + e.what());
    }
  }
  count_send(n);
}

Bytes SocketTransport::receive(int source) {
  if (source < 0 || source >= size_) throw TransportError("rank " + std::to_string(source) + " out of range");
  auto& inbox = *inboxes_[std::size_t(source)];
  std::unique_lock lock(inbox.mutex);
  inbox.ready.wait(lock, [&] { return !inbox.queue.empty() || inbox.closed; });
  if (inbox.queue.empty()) {
    throw TransportError("rank " + std::to_string(rank_) + ": connection from rank " + std::to_string(source) +
                         " closed" + (inbox.error.empty() ? "" : " (" + inbox.error + ")"));
  }
  Bytes out = std::move(inbox.queue.front());
  inbox.queue.pop_front();
  count_receive();
  return out;
}

}  // namespace latticeblocks::comm
