/*
 * Copyright 2026 The RPRR Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rprr/transport.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

#include "rprr/errors.h"

namespace rprr {
namespace {

struct Queue {
  std::mutex mutex;
  std::condition_variable ready;
  std::deque<std::vector<std::uint8_t>> frames;
  bool closed = false;
};

class InProcessEndpoint : public Endpoint {
 public:
  InProcessEndpoint(std::shared_ptr<Queue> in, std::shared_ptr<Queue> out)
      : in_(std::move(in)), out_(std::move(out)) {}
  ~InProcessEndpoint() override { Close(); }

  void Close() override {
    for (Queue* q : {in_.get(), out_.get()}) {
      std::lock_guard<std::mutex> lock(q->mutex);
      q->closed = true;
      q->ready.notify_all();
    }
  }

 protected:
  void SendFrame(std::vector<std::uint8_t> frame) override {
    std::lock_guard<std::mutex> lock(out_->mutex);
    if (out_->closed) throw SessionAbortError("in-process link is closed");
    out_->frames.push_back(std::move(frame));
    out_->ready.notify_one();
  }

  std::vector<std::uint8_t> ReceiveFrame() override {
    std::unique_lock<std::mutex> lock(in_->mutex);
    const bool ok = in_->ready.wait_for(lock, timeout_, [&] {
      return !in_->frames.empty() || in_->closed;
    });
    if (!ok) throw SessionAbortError("timed out waiting for the peer");
    if (in_->frames.empty()) {
      throw SessionAbortError("in-process link closed by the peer");
    }
    std::vector<std::uint8_t> frame = std::move(in_->frames.front());
    in_->frames.pop_front();
    return frame;
  }

 private:
  std::shared_ptr<Queue> in_;
  std::shared_ptr<Queue> out_;
};

std::string ErrnoText(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

class SocketEndpoint : public Endpoint {
 public:
  explicit SocketEndpoint(int fd) : fd_(fd) {}
  ~SocketEndpoint() override {
    Close();
    ::close(fd_);
  }

  void Close() override {
    if (!closed_.exchange(true)) {
      ::shutdown(fd_, SHUT_RDWR);
    }
  }

 protected:
  void SendFrame(std::vector<std::uint8_t> frame) override {
    std::size_t sent = 0;
    while (sent < frame.size()) {
      const ssize_t n = ::send(fd_, frame.data() + sent, frame.size() - sent,
                               MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw SessionAbortError(ErrnoText("socket send failed"));
      sent += static_cast<std::size_t>(n);
    }
  }

  std::vector<std::uint8_t> ReceiveFrame() override {
    ApplyTimeout();
    std::vector<std::uint8_t> frame(kFrameHeaderSize);
    ReadExactly(frame.data(), kFrameHeaderSize);
    const FrameHeader h = ParseFrameHeader(frame);
    frame.resize(kFrameHeaderSize + h.body_length);
    ReadExactly(frame.data() + kFrameHeaderSize, h.body_length);
    return frame;
  }

 private:
  void ApplyTimeout() {
    if (applied_timeout_ == timeout_) return;
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(timeout_.count() / 1000);
    tv.tv_usec = static_cast<suseconds_t>((timeout_.count() % 1000) * 1000);
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    applied_timeout_ = timeout_;
  }

  void ReadExactly(std::uint8_t* out, std::size_t size) {
    std::size_t got = 0;
    while (got < size) {
      const ssize_t n = ::recv(fd_, out + got, size - got, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
        throw SessionAbortError("timed out waiting for the peer");
      }
      if (n < 0) throw SessionAbortError(ErrnoText("socket receive failed"));
      if (n == 0) throw SessionAbortError("socket closed by the peer");
      got += static_cast<std::size_t>(n);
    }
  }

  int fd_;
  std::atomic<bool> closed_{false};
  std::chrono::milliseconds applied_timeout_{-1};
};

}  // namespace

void Endpoint::Send(Message message) {
  message.sequence = next_send_++;
  std::vector<std::uint8_t> frame = EncodeFrame(message);
  const std::size_t size = frame.size();
  SendFrame(std::move(frame));
  counters_.bytes_sent += size;
  counters_.messages_sent += 1;
  counters_.bytes_sent_by_type[static_cast<std::size_t>(message.type)] +=
      size;
}

Message Endpoint::Receive() {
  const std::vector<std::uint8_t> frame = ReceiveFrame();
  Message m = DecodeFrame(frame);
  if (m.sequence != next_receive_) {
    throw ProtocolError("out-of-order message: expected sequence " +
                        std::to_string(next_receive_) + ", got " +
                        std::to_string(m.sequence));
  }
  ++next_receive_;
  counters_.bytes_received += frame.size();
  counters_.messages_received += 1;
  return m;
}

EndpointPair MakeInProcessPair() {
  auto ab = std::make_shared<Queue>();
  auto ba = std::make_shared<Queue>();
  return {std::make_unique<InProcessEndpoint>(ba, ab),
          std::make_unique<InProcessEndpoint>(ab, ba)};
}

EndpointPair MakeSocketPair() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
    throw SessionAbortError(ErrnoText("socketpair failed"));
  }
  return {std::make_unique<SocketEndpoint>(fds[0]),
          std::make_unique<SocketEndpoint>(fds[1])};
}

EndpointPair MakePair(TransportKind kind) {
  return kind == TransportKind::kInProcess ? MakeInProcessPair()
                                           : MakeSocketPair();
}

TcpListener::TcpListener(std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw SessionAbortError(ErrnoText("socket failed"));
  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(fd_, 4) != 0) {
    const std::string text = ErrnoText("bind/listen failed");
    ::close(fd_);
    throw SessionAbortError(text);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Endpoint> TcpListener::Accept() {
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) throw SessionAbortError(ErrnoText("accept failed"));
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return std::make_unique<SocketEndpoint>(fd);
}

std::unique_ptr<Endpoint> TcpConnect(const std::string& host,
                                     std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 ||
      res == nullptr) {
    throw SessionAbortError("cannot resolve " + host);
  }
  const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  const int rc = fd < 0 ? -1 : ::connect(fd, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc != 0) {
    const std::string text = ErrnoText("connect failed");
    if (fd >= 0) ::close(fd);
    throw SessionAbortError(text);
  }
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return std::make_unique<SocketEndpoint>(fd);
}

TransportKind ParseTransportKind(const std::string& name) {
  if (name == "inproc" || name == "in-process") return TransportKind::kInProcess;
  if (name == "socket") return TransportKind::kSocket;
  throw ValidationError("unknown transport '" + name +
                        "' (expected inproc or socket)");
}

}  // namespace rprr
