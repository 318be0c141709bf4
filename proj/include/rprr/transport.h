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

#ifndef RPRR_TRANSPORT_H_
#define RPRR_TRANSPORT_H_

#include <array>
#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "rprr/wire.h"

namespace rprr {

struct LinkCounters {
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_received = 0;
  // Indexed by the numeric message type.
  std::array<std::uint64_t, 16> bytes_sent_by_type{};

  std::uint64_t sent(MessageType type) const {
    return bytes_sent_by_type[static_cast<std::size_t>(type)];
  }
};

// One end of a duplex, in-order message channel. Sequence numbers are
// assigned on send and checked on receive. A closed, broken, or silent
// peer surfaces as SessionAbortError.
class Endpoint {
 public:
  virtual ~Endpoint() = default;

  void Send(Message message);
  Message Receive();
  virtual void Close() = 0;

  const LinkCounters& counters() const { return counters_; }
  void set_timeout(std::chrono::milliseconds timeout) { timeout_ = timeout; }

 protected:
  virtual void SendFrame(std::vector<std::uint8_t> frame) = 0;
  virtual std::vector<std::uint8_t> ReceiveFrame() = 0;

  std::chrono::milliseconds timeout_{30000};

 private:
  LinkCounters counters_;
  std::uint32_t next_send_ = 0;
  std::uint32_t next_receive_ = 0;
};

using EndpointPair =
    std::pair<std::unique_ptr<Endpoint>, std::unique_ptr<Endpoint>>;

enum class TransportKind { kInProcess, kSocket };

// Two endpoints joined by a pair of in-memory queues.
EndpointPair MakeInProcessPair();

// Two endpoints joined by a connected AF_UNIX stream socket pair.
EndpointPair MakeSocketPair();

EndpointPair MakePair(TransportKind kind);

// TCP on the loopback interface. The listener binds an ephemeral port when
// `port` is 0.
class TcpListener {
 public:
  explicit TcpListener(std::uint16_t port = 0);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  std::unique_ptr<Endpoint> Accept();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

std::unique_ptr<Endpoint> TcpConnect(const std::string& host,
                                     std::uint16_t port);

TransportKind ParseTransportKind(const std::string& name);

}  // namespace rprr

#endif  // RPRR_TRANSPORT_H_
