#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "latticeblocks/bytes.hpp"

namespace latticeblocks::comm {

/// Point-to-point byte transport between simulated processes. Messages from
/// one sender to one receiver arrive in order and intact, or an error is raised.
class Transport {
 public:
  virtual ~Transport() = default;

  virtual int rank() const = 0;
  virtual int size() const = 0;
  virtual void send(int dest, Bytes bytes) = 0;
  /// Blocks until the next message from `source` arrives.
  virtual Bytes receive(int source) = 0;

  std::uint64_t messages_sent() const { return sent_; }
  std::uint64_t messages_received() const { return received_; }
  std::uint64_t bytes_sent() const { return bytes_sent_; }

 protected:
  void count_send(std::size_t bytes) {
    ++sent_;
    bytes_sent_ += bytes;
  }
  void count_receive() { ++received_; }

 private:
  std::uint64_t sent_ = 0;
  std::uint64_t received_ = 0;
  std::uint64_t bytes_sent_ = 0;
};

/// Shared mailboxes for workers running as threads of one OS process.
class InProcessHub {
 public:
  explicit InProcessHub(int size);

  std::unique_ptr<Transport> endpoint(int rank);
  int size() const { return size_; }

  /// Wakes every blocked receiver with a TransportError; used when one
  /// worker fails so the others do not wait forever.
  void abort(const std::string& reason);

 private:
  friend class InProcessTransport;

  struct Mailbox {
    std::mutex mutex;
    std::condition_variable ready;
    std::deque<Bytes> queue;
  };

  Mailbox& box(int from, int to) { return *boxes_[std::size_t(from) * size_ + to]; }

  int size_;
  std::vector<std::unique_ptr<Mailbox>> boxes_;
  std::atomic<bool> aborted_{false};
  std::string abort_reason_;
  std::mutex abort_mutex_;
};

/// Unix-domain stream sockets between OS processes. Each frame is a u64
/// little-endian length followed by the process buffer. One reader thread per
/// peer drains incoming frames so large sends never deadlock.
class SocketTransport : public Transport {
 public:
  /// Listens on `<dir>/rank<r>.sock` and connects to every other rank.
  static std::unique_ptr<SocketTransport> connect(const std::filesystem::path& dir, int rank, int size,
                                                  std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~SocketTransport() override;

  int rank() const override { return rank_; }
  int size() const override { return size_; }
  void send(int dest, Bytes bytes) override;
  Bytes receive(int source) override;

 private:
  SocketTransport(int rank, int size);
  void reader_loop(int peer, int fd);

  struct Inbox {
    std::mutex mutex;
    std::condition_variable ready;
    std::deque<Bytes> queue;
    bool closed = false;
    std::string error;
  };

  int rank_;
  int size_;
  int listen_fd_ = -1;
  std::filesystem::path socket_path_;
  std::vector<int> out_fds_;
  std::vector<int> in_fds_;
  std::vector<std::unique_ptr<Inbox>> inboxes_;
  std::vector<std::thread> readers_;
};

}  // namespace latticeblocks::comm
