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
#include "evg/transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <thread>

#include <fmt/format.h>

#include "evg/error.hpp"
#include "evg/log.hpp"

namespace evg {

namespace {

std::string errno_text() { return std::strerror(errno); }

// Waits until `fd` is readable. False on timeout.
bool wait_readable(int fd, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() < 0) return false;
    pollfd p{fd, POLLIN, 0};
    const int rc = ::poll(&p, 1, static_cast<int>(left.count()));
    if (rc > 0) return true;
    if (rc == 0) return false;
    if (errno != EINTR) throw ProtocolError(fmt::format("poll failed: {}", errno_text()));
  }
}

}  // namespace

FdTransport::FdTransport(int read_fd, int write_fd) : read_fd_(read_fd), write_fd_(write_fd) {}

FdTransport::~FdTransport() { FdTransport::close(); }

void FdTransport::close() {
  if (read_fd_ >= 0) ::close(read_fd_);
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  read_fd_ = write_fd_ = -1;
}

void FdTransport::write_all(std::span<const std::uint8_t> bytes) {
  if (write_fd_ < 0) throw ProtocolError("write on closed transport");
  std::size_t done = 0;
  while (done < bytes.size()) {
    ssize_t n = ::send(write_fd_, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
    if (n < 0 && errno == ENOTSOCK) n = ::write(write_fd_, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(fmt::format("transport write failed: {}", errno_text()));
    }
    done += static_cast<std::size_t>(n);
  }
}

bool FdTransport::read_exact(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) {
  if (read_fd_ < 0) throw ProtocolError("read on closed transport");
  std::size_t done = 0;
  while (done < out.size()) {
    if (!wait_readable(read_fd_, timeout)) {
      throw ProtocolError(fmt::format("transport read timed out after {} ms", timeout.count()));
    }
    const ssize_t n = ::read(read_fd_, out.data() + done, out.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(fmt::format("transport read failed: {}", errno_text()));
    }
    if (n == 0) {
      if (done == 0) return false;
      throw ProtocolError("connection closed mid-frame");
    }
    done += static_cast<std::size_t>(n);
  }
  return true;
}

void MemoryTransport::write_all(std::span<const std::uint8_t> bytes) {
  if (closed_) throw ProtocolError("write on closed transport");
  output_.insert(output_.end(), bytes.begin(), bytes.end());
}

bool MemoryTransport::read_exact(std::span<std::uint8_t> out, std::chrono::milliseconds) {
  if (closed_) throw ProtocolError("read on closed transport");
  if (out.empty()) return true;
  if (pos_ >= input_.size()) return false;
  if (input_.size() - pos_ < out.size()) {
    pos_ = input_.size();
    throw ProtocolError("connection closed mid-frame");
  }
  std::copy_n(input_.begin() + static_cast<std::ptrdiff_t>(pos_), out.size(), out.begin());
  pos_ += out.size();
  return true;
}

std::unique_ptr<ChildProcessTransport> ChildProcessTransport::spawn(const std::vector<std::string> &argv) {
  if (argv.empty()) throw InvalidArgument("adapter command is empty");
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
    throw IoError(fmt::format("socketpair failed: {}", errno_text()));
  }
  std::vector<char *> args;
  for (const auto &a : argv) args.push_back(const_cast<char *>(a.c_str()));
  args.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    throw IoError(fmt::format("fork failed: {}", errno_text()));
  }
  if (pid == 0) {
    ::dup2(fds[1], STDIN_FILENO);
    ::dup2(fds[1], STDOUT_FILENO);
    ::execvp(args[0], args.data());
    _exit(127);
  }
  ::close(fds[1]);
  logger().debug("spawned adapter '{}' (pid {})", argv[0], pid);
  return std::unique_ptr<ChildProcessTransport>(new ChildProcessTransport(fds[0], pid));
}

ChildProcessTransport::~ChildProcessTransport() {
  close();
  if (pid_ <= 0) return;
  int status = 0;
  for (int i = 0; i < 200; ++i) {
    if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  logger().warn("adapter pid {} did not exit on EOF; killing it", pid_);
  ::kill(pid_, SIGKILL);
  ::waitpid(pid_, &status, 0);
}

std::unique_ptr<Transport> connect_tcp(const std::string &host, int port, std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo *res = nullptr;
  const std::string port_str = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res); rc != 0) {
    throw IoError(fmt::format("cannot resolve {}:{}: {}", host, port, gai_strerror(rc)));
  }
  std::string last_error = "no addresses";
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    for (addrinfo *ai = res; ai != nullptr; ai = ai->ai_next) {
      const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
        ::freeaddrinfo(res);
        const int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        return std::make_unique<FdTransport>(fd, fd);
      }
      last_error = errno_text();
      ::close(fd);
    }
    if (std::chrono::steady_clock::now() >= deadline) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  ::freeaddrinfo(res);
  throw IoError(fmt::format("cannot connect to {}:{}: {}", host, port, last_error));
}

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_socket_pair() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
    throw IoError(fmt::format("socketpair failed: {}", errno_text()));
  }
  return {std::make_unique<FdTransport>(fds[0], fds[0]), std::make_unique<FdTransport>(fds[1], fds[1])};
}

TcpListener::TcpListener(int port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) throw IoError(fmt::format("socket failed: {}", errno_text()));
  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(fd_, reinterpret_cast<sockaddr *>(&addr), sizeof(addr)) != 0 || ::listen(fd_, 16) != 0) {
    const std::string err = errno_text();
    ::close(fd_);
    throw IoError(fmt::format("cannot listen on port {}: {}", port, err));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr *>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Transport> TcpListener::accept(std::chrono::milliseconds timeout) {
  if (!wait_readable(fd_, timeout)) throw IoError("accept timed out");
  const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
  if (fd < 0) throw IoError(fmt::format("accept failed: {}", errno_text()));
  return std::make_unique<FdTransport>(fd, fd);
}

std::optional<protocol::Frame> read_frame(Transport &t, std::chrono::milliseconds timeout) {
  std::uint8_t header[protocol::kHeaderSize];
  if (!t.read_exact(header, timeout)) return std::nullopt;
  protocol::Frame f;
  const std::uint32_t len = protocol::decode_header(header, f.type);
  // Allocation tracks bytes actually received, not the declared length.
  constexpr std::size_t kChunk = 1 << 20;
  while (f.payload.size() < len) {
    const std::size_t begin = f.payload.size();
    const std::size_t n = std::min<std::size_t>(kChunk, len - begin);
    f.payload.resize(begin + n);
    if (!t.read_exact(std::span<std::uint8_t>(f.payload).subspan(begin, n), timeout)) {
      throw ProtocolError("connection closed mid-frame");
    }
  }
  return f;
}

void write_frame(Transport &t, const protocol::Frame &frame) { t.write_all(protocol::encode_frame(frame)); }

}  // namespace evg
