#include <gtest/gtest.h>

#include <poll.h>
#include <sys/socket.h>

#include <atomic>
#include <thread>

#include "softgrasp/hub/sensor_hub.hpp"
#include "softgrasp/util/errors.hpp"
#include "softgrasp/util/rng.hpp"
#include "test_support.hpp"

using namespace softgrasp;
using namespace std::chrono_literals;
using testing_support::QueueSource;

namespace {

node::SensorSnapshot snap(int id, double delta, std::uint64_t seq = 1) {
  return {id, seq, 0, delta, delta > 0.05, true};
}

struct Rig {
  std::array<QueueSource*, 5> queues{};
  std::array<std::unique_ptr<node::SensorNode>, 5> nodes;
  double fake_now = 0.0;

  void make(std::size_t n, std::uint16_t port = 0) {
    auto src = std::make_unique<QueueSource>();
    queues[n] = src.get();
    node::NodeConfig cfg;
    cfg.sensor_id = static_cast<int>(n);
    cfg.listen.port = port;
    nodes[n] = std::make_unique<node::SensorNode>(cfg, std::move(src));
    nodes[n]->start(false);
  }
  void feed(std::size_t n, double value) {
    queues[n]->push(tactile::TactileImage(16, 16, value));
    nodes[n]->capture_once();
  }
};

std::uint16_t unused_port() {
  auto s = net::listen_tcp({"127.0.0.1", 0});
  return net::local_port(s);
}

/// Answers PING but never LATEST, like a node wedged after the handshake.
class SilentNode {
 public:
  SilentNode() : listener_(net::listen_tcp({"127.0.0.1", 0})) {
    port_ = net::local_port(listener_);
    thread_ = std::thread([this] { run(); });
  }
  ~SilentNode() {
    stop_ = true;
    thread_.join();
  }
  std::uint16_t port() const { return port_; }

 private:
  void run() {
    std::vector<net::Socket> conns;
    std::vector<net::LineBuffer> bufs;
    while (!stop_) {
      std::vector<pollfd> fds{{listener_.fd(), POLLIN, 0}};
      for (auto& c : conns) fds.push_back({c.fd(), POLLIN, 0});
      if (::poll(fds.data(), fds.size(), 20) <= 0) continue;
      if (fds[0].revents & POLLIN) {
        conns.emplace_back(::accept(listener_.fd(), nullptr, nullptr));
        bufs.emplace_back();
      }
      for (std::size_t i = 1; i < fds.size(); ++i) {
        if (!(fds[i].revents & POLLIN)) continue;
        net::read_into(conns[i - 1].fd(), bufs[i - 1]);
        while (auto line = bufs[i - 1].next_line()) {
          if (*line == "PING") net::send_all(conns[i - 1].fd(), "PONG 4\n");
        }
      }
    }
  }
  net::Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stop_{false};
  std::thread thread_;
};

hub::HubConfig config_for(const Rig& rig, std::optional<std::uint16_t> override_port = {},
                          std::size_t override_index = 4) {
  hub::HubConfig cfg;
  for (std::size_t n = 0; n < 5; ++n) {
    if (rig.nodes[n]) cfg.endpoints[n] = rig.nodes[n]->endpoint();
  }
  if (override_port) cfg.endpoints[override_index] = {"127.0.0.1", *override_port};
  cfg.poll_timeout_ms = 50;
  cfg.reconnect_interval_ms = 20;
  return cfg;
}

}  // namespace

TEST(AssembleVector, SingleSensorContact) {
  std::array<std::optional<node::SensorSnapshot>, 5> s{snap(0, 0.06), snap(1, 0), snap(2, 0),
                                                       snap(3, 0), snap(4, 0)};
  const auto v = hub::assemble_vector(s, {1, 2, 3, 4, 5}, 0.05, 66.7);
  EXPECT_DOUBLE_EQ(v.mean, 0.012);
  EXPECT_EQ(v.contacts, (std::array<bool, 5>{true, false, false, false, false}));
  EXPECT_TRUE(v.complete);
  EXPECT_FALSE(v.stale);
  EXPECT_DOUBLE_EQ(v.max_age_ms, 5);
}

TEST(AssembleVector, EvenPressure) {
  std::array<std::optional<node::SensorSnapshot>, 5> s;
  for (int i = 0; i < 5; ++i) s[i] = snap(i, 0.5);
  const auto v = hub::assemble_vector(s, {}, 0.05, 66.7);
  EXPECT_DOUBLE_EQ(v.mean, 0.5);
  for (bool c : v.contacts) EXPECT_TRUE(c);
}

TEST(AssembleVector, MissingSensorCountsAsZeroAndIncomplete) {
  std::array<std::optional<node::SensorSnapshot>, 5> s{snap(0, 0.5), snap(1, 0.5), snap(2, 0.5),
                                                       snap(3, 0.5), std::nullopt};
  const auto v = hub::assemble_vector(s, {10, 10, 10, 10, 1e9}, 0.05, 66.7);
  EXPECT_DOUBLE_EQ(v.mean, 0.4);
  EXPECT_FALSE(v.complete);
  EXPECT_FALSE(v.stale);  // the absent sensor's age does not count
  EXPECT_EQ(v.deltas[4], 0.0);
}

TEST(AssembleVector, ContactRederivedAndStaleness) {
  std::array<std::optional<node::SensorSnapshot>, 5> s;
  for (int i = 0; i < 5; ++i) s[i] = snap(i, 0.08);
  auto v = hub::assemble_vector(s, {0, 0, 0, 0, 70}, 0.1, 66.7);
  for (bool c : v.contacts) EXPECT_FALSE(c);
  EXPECT_TRUE(v.stale);
}

TEST(AssembleVectorProperty, MeanIsAverageOfDeltas) {
  util::Rng rng(8);
  for (int i = 0; i < 500; ++i) {
    std::array<std::optional<node::SensorSnapshot>, 5> s;
    double sum = 0;
    for (int n = 0; n < 5; ++n) {
      if (rng.uniform() < 0.2) continue;
      s[n] = snap(n, rng.uniform());
      sum += s[n]->delta;
    }
    const auto v = hub::assemble_vector(s, {}, 0.05, 66.7);
    EXPECT_NEAR(v.mean, sum / 5.0, 1e-15);
    EXPECT_GE(v.mean, 0.0);
    EXPECT_LE(v.mean, 1.0);
  }
}

TEST(HubConfig, FromKvAndValidation) {
  const auto kv = util::KvConfig::parse(
      "node0=10.0.0.1:7000\nnode1=10.0.0.2:7000\nnode2=10.0.0.3:7000\n"
      "node3=10.0.0.4:7000\nnode4=10.0.0.5:7001\npoll_timeout_ms=3\n");
  const auto cfg = hub::HubConfig::from_kv(kv);
  EXPECT_EQ(cfg.endpoints[4].str(), "10.0.0.5:7001");
  EXPECT_DOUBLE_EQ(cfg.poll_timeout_ms, 3);
  EXPECT_THROW(hub::HubConfig::from_kv(util::KvConfig::parse("node0=a:1\n")),
               std::invalid_argument);
  auto bad = cfg;
  bad.poll_timeout_ms = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(SensorHub, PollsAllFiveNodes) {
  Rig rig;
  for (std::size_t n = 0; n < 5; ++n) rig.make(n);
  for (std::size_t n = 0; n < 5; ++n) rig.feed(n, 100);
  double now = 0;
  hub::SensorHub hub(config_for(rig), [&now] { return now; });
  hub.connect();
  EXPECT_EQ(hub.live_count(), 5u);
  hub.set_all_references();
  rig.feed(0, 100);
  auto v = hub.poll();
  EXPECT_TRUE(v.complete);
  EXPECT_EQ(v.seqs[0], 2u);
  EXPECT_NEAR(v.mean, 0.0, 1e-12);
  EXPECT_FALSE(v.stale);

  now = 100;  // nothing new arrives for 100 ms
  v = hub.poll();
  EXPECT_DOUBLE_EQ(v.max_age_ms, 100);
  EXPECT_TRUE(v.stale);
  for (std::size_t n = 0; n < 5; ++n) rig.feed(n, 100);
  v = hub.poll();
  EXPECT_DOUBLE_EQ(v.max_age_ms, 0);
  EXPECT_FALSE(v.stale);
}

TEST(SensorHub, DegradedStartAndRecovery) {
  Rig rig;
  for (std::size_t n = 0; n < 4; ++n) rig.make(n);
  for (std::size_t n = 0; n < 4; ++n) rig.feed(n, 100);
  const auto late_port = unused_port();
  hub::SensorHub hub(config_for(rig, late_port));
  hub.connect();
  EXPECT_EQ(hub.live_count(), 4u);
  EXPECT_FALSE(hub.live()[4]);

  auto v = hub.poll();
  EXPECT_FALSE(v.complete);
  EXPECT_EQ(v.deltas[4], 0.0);
  EXPECT_THROW(hub.set_all_references(), hub::ReferenceError);

  rig.make(4, late_port);
  rig.feed(4, 100);
  for (int i = 0; i < 100 && hub.live_count() < 5; ++i) {
    std::this_thread::sleep_for(10ms);
    v = hub.poll();
  }
  EXPECT_EQ(hub.live_count(), 5u);
  v = hub.poll();
  EXPECT_TRUE(v.complete);
  EXPECT_NO_THROW(hub.set_all_references());
}

TEST(SensorHub, NodeLossIsDetectedAndHubKeepsPolling) {
  Rig rig;
  for (std::size_t n = 0; n < 5; ++n) rig.make(n);
  for (std::size_t n = 0; n < 5; ++n) rig.feed(n, 100);
  hub::SensorHub hub(config_for(rig));
  hub.connect();
  hub.poll();
  rig.nodes[2]->stop();
  for (int i = 0; i < 5; ++i) hub.poll();
  EXPECT_FALSE(hub.live()[2]);
  EXPECT_EQ(hub.live_count(), 4u);
}

TEST(SensorHub, PollIsBoundedBySilentNode) {
  Rig rig;
  for (std::size_t n = 0; n < 4; ++n) rig.make(n);
  for (std::size_t n = 0; n < 4; ++n) rig.feed(n, 100);
  SilentNode silent;
  auto cfg = config_for(rig, silent.port());
  cfg.poll_timeout_ms = 30;
  hub::SensorHub hub(cfg);
  hub.connect();
  ASSERT_EQ(hub.live_count(), 5u);
  for (int i = 0; i < 5; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto v = hub.poll();
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(ms, 30.0 + 20.0);
    EXPECT_FALSE(v.complete);
  }
}

TEST(SensorHub, ReferenceFailureNamesNotReadyNode) {
  Rig rig;
  for (std::size_t n = 0; n < 5; ++n) rig.make(n);
  for (std::size_t n = 0; n < 5; ++n) {
    if (n != 3) rig.feed(n, 100);
  }
  hub::SensorHub hub(config_for(rig));
  hub.connect();
  try {
    hub.set_all_references();
    FAIL() << "expected ReferenceError";
  } catch (const hub::ReferenceError& e) {
    EXPECT_EQ(e.failing_nodes(), std::vector<int>{3});
    EXPECT_NE(std::string(e.what()).find('3'), std::string::npos);
  }
  rig.feed(3, 100);
  EXPECT_NO_THROW(hub.set_all_references());
}

TEST(SensorHub, NotReadyWhenNoNodeAnswers) {
  Rig rig;
  hub::HubConfig cfg;
  for (auto& ep : cfg.endpoints) ep = {"127.0.0.1", unused_port()};
  cfg.poll_timeout_ms = 10;
  cfg.connect_timeout_ms = 50;
  hub::SensorHub hub(cfg);
  hub.connect();
  EXPECT_EQ(hub.live_count(), 0u);
  EXPECT_THROW(hub.poll(), NotReadyError);
}

TEST(InProcessHub, TracksFreshness) {
  Rig rig;
  for (std::size_t n = 0; n < 5; ++n) rig.make(n);
  for (std::size_t n = 0; n < 5; ++n) rig.feed(n, 100);
  double now = 0;
  hub::InProcessHub hub({rig.nodes[0].get(), rig.nodes[1].get(), rig.nodes[2].get(),
                         rig.nodes[3].get(), rig.nodes[4].get()},
                        0.05, 66.7, [&now] { return now; });
  auto v = hub.read();
  EXPECT_TRUE(v.complete);
  now = 80;
  v = hub.read();
  EXPECT_TRUE(v.stale);
  for (std::size_t n = 0; n < 5; ++n) rig.feed(n, 100);
  v = hub.read();
  EXPECT_FALSE(v.stale);
}
