/**
 * Copyright 2026 The EvG Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef EVG_TRANSPORT_HPP_
#define EVG_TRANSPORT_HPP_

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evg/protocol.hpp"

namespace evg {

inline constexpr std::chrono::milliseconds kDefaultTimeout{30000};

// Blocking byte stream carrying protocol frames.
class Transport {
 public:
  virtual ~Transport() = default;

  virtual void write_all(std::span<const std::uint8_t> bytes) = 0;
  // Fills `out` completely. Returns false on EOF before the first byte;
  // throws ProtocolError on EOF mid-read or timeout.
  virtual bool read_exact(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) = 0;
  virtual void close() = 0;
};

// A connected socket (or pipe pair). Owns its descriptors.
class FdTransport : public Transport {
 public:
  FdTransport(int read_fd, int write_fd);
  ~FdTransport() override;
  FdTransport(const FdTransport &) = delete;
  FdTransport &operator=(const FdTransport &) = delete;

  void write_all(std::span<const std::uint8_t> bytes) override;
  bool read_exact(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) override;
  void close() override;

 private:
  int read_fd_;
  int write_fd_;
};

// Reads from a fixed buffer, records writes. Used to drive decoders with
// arbitrary byte streams.
class MemoryTransport : public Transport {
 public:
  explicit MemoryTransport(std::vector<std::uint8_t> input = {}) : input_(std::move(input)) {}

  void write_all(std::span<const std::uint8_t> bytes) override;
  bool read_exact(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) override;
  void close() override { closed_ = true; }

  const std::vector<std::uint8_t> &written() const { return output_; }
  bool closed() const { return closed_; }

 private:
  std::vector<std::uint8_t> input_;
  std::size_t pos_ = 0;
  std::vector<std::uint8_t> output_;
  bool closed_ = false;
};

// Child process whose stdin and stdout are one end of a socket pair.
class ChildProcessTransport : public FdTransport {
 public:
  static std::unique_ptr<ChildProcessTransport> spawn(const std::vector<std::string> &argv);
  ~ChildProcessTransport() override;

  int pid() const { return pid_; }

 private:
  ChildProcessTransport(int fd, int pid) : FdTransport(fd, fd), pid_(pid) {}
  int pid_;
};

std::unique_ptr<Transport> connect_tcp(const std::string &host, int port,
                                       std::chrono::milliseconds timeout = kDefaultTimeout);

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_socket_pair();

class TcpListener {
 public:
  // port 0 binds an ephemeral port on 127.0.0.1.
  explicit TcpListener(int port = 0);
  ~TcpListener();
  TcpListener(const TcpListener &) = delete;
  TcpListener &operator=(const TcpListener &) = delete;

  int port() const { return port_; }
  std::unique_ptr<Transport> accept(std::chrono::milliseconds timeout = kDefaultTimeout);

 private:
  int fd_;
  int port_;
};

// nullopt on clean EOF between frames.
std::optional<protocol::Frame> read_frame(Transport &t, std::chrono::milliseconds timeout = kDefaultTimeout);
void write_frame(Transport &t, const protocol::Frame &frame);

}  // namespace evg

#endif  // EVG_TRANSPORT_HPP_
