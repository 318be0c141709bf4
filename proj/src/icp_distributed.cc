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

#include "rprr/icp_distributed.h"

#include <exception>
#include <future>
#include <thread>

#include "rprr/errors.h"

namespace rprr {
namespace {

void CheckHello(const Hello& hello, Role expected, const Intrinsics& k,
                const IcpConfig& config) {
  if (hello.role != expected) {
    throw ProtocolError("peer announced the wrong role");
  }
  if (hello.intrinsics_hash != k.Hash()) {
    throw ProtocolError("peer intrinsics differ");
  }
  if (hello.seed != config.seed) {
    throw ProtocolError("peer sampling seed differs");
  }
}

void SendAbort(Endpoint& link, std::uint8_t reason, const std::string& text) {
  try {
    link.Send(MakeAbort({reason, text}));
  } catch (const Error&) {
    // The link is already gone; the local error is what matters.
  }
}

}  // namespace

IcpResult RunIcpRoleA(Endpoint& link, const DepthImage& z_a,
                      const Intrinsics& k, const IcpConfig& config) {
  std::optional<IcpEstimator> estimator;
  try {
    link.Send(MakeHello({Role::kA, k.Hash(), config.seed}));
    CheckHello(ParseHello(link.Receive()), Role::kB, k, config);
    std::vector<SampleRecord> peer = ParseReferenceSamples(link.Receive());
    estimator.emplace(z_a, k, config);
    estimator->SetPeerSamples(std::move(peer));
  } catch (const ProtocolError& e) {
    SendAbort(link, kAbortProtocol, e.what());
    throw;
  } catch (const InsufficientDataError& e) {
    SendAbort(link, kAbortIcpFailed, e.what());
    throw;
  }

  while (!estimator->done()) {
    link.Send(MakeSamples(estimator->Queries()));
    const Message reply = link.Receive();
    try {
      estimator->Step(ParseMatches(reply));
    } catch (const ProtocolError& e) {
      SendAbort(link, kAbortProtocol, e.what());
      throw;
    } catch (const InsufficientDataError& e) {
      SendAbort(link, kAbortIcpFailed, e.what());
      throw;
    } catch (const DegenerateGeometryError& e) {
      SendAbort(link, kAbortIcpFailed, e.what());
      throw;
    }
  }
  IcpResult result = estimator->Result();
  link.Send(MakePoseReport({result.pose,
                            static_cast<std::uint32_t>(result.iterations),
                            result.converged}));
  return result;
}

std::optional<PoseReport> RunIcpRoleB(Endpoint& link, const DepthImage& z_b,
                                      const Intrinsics& k,
                                      const IcpConfig& config) {
  std::optional<IcpResponder> responder;
  try {
    CheckHello(ParseHello(link.Receive()), Role::kA, k, config);
    link.Send(MakeHello({Role::kB, k.Hash(), config.seed}));
  } catch (const ProtocolError& e) {
    SendAbort(link, kAbortProtocol, e.what());
    throw;
  }
  try {
    responder.emplace(z_b, k, config);
  } catch (const InsufficientDataError& e) {
    SendAbort(link, kAbortIcpFailed, e.what());
    throw;
  }
  link.Send(MakeReferenceSamples(responder->samples()));

  for (;;) {
    const Message m = link.Receive();
    switch (m.type) {
      case MessageType::kSamples:
        link.Send(MakeMatches(responder->Answer(ParseSamples(m))));
        break;
      case MessageType::kConverged:
      case MessageType::kPoseUpdate:
        return ParsePoseReport(m);
      case MessageType::kAbort: {
        const AbortNotice notice = ParseAbort(m);
        if (notice.reason == kAbortIcpFailed) return std::nullopt;
        throw SessionAbortError("peer aborted: " + notice.text);
      }
      default:
        SendAbort(link, kAbortProtocol, "unexpected message during ICP");
        throw ProtocolError(std::string("unexpected ") +
                            MessageTypeName(m.type) + " during ICP");
    }
  }
}

DistributedIcpRun RunIcpDistributed(const DepthImage& z_a,
                                    const DepthImage& z_b, const Intrinsics& k,
                                    const IcpConfig& config,
                                    TransportKind kind) {
  EndpointPair link = MakePair(kind);
  Endpoint& end_a = *link.first;
  Endpoint& end_b = *link.second;
  auto role_b = std::async(std::launch::async, [&] {
    return RunIcpRoleB(end_b, z_b, k, config);
  });
  DistributedIcpRun run;
  std::exception_ptr failure;
  try {
    run.result = RunIcpRoleA(end_a, z_a, k, config);
  } catch (...) {
    failure = std::current_exception();
    end_a.Close();
  }
  try {
    role_b.get();
  } catch (...) {
    if (!failure) failure = std::current_exception();
  }
  if (failure) std::rethrow_exception(failure);
  run.a = end_a.counters();
  run.b = end_b.counters();
  return run;
}

}  // namespace rprr
