#include "softgrasp/harness/sensor_rig.hpp"

namespace softgrasp::harness {

LocalSensorRig::LocalSensorRig(SimPlant& plant, RigOptions options)
    : plant_(plant), options_(options) {
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    node::NodeConfig cfg;
    cfg.sensor_id = static_cast<int>(n);
    cfg.listen = net::Endpoint{"127.0.0.1", 0};
    cfg.capture_period_ms = options_.capture_period_ms;
    cfg.contact_threshold = options_.contact_threshold;
    cfg.frame_source = node::FrameSourceKind::Simulated;
    sim::FingertipCamera* camera = &plant_.camera(n);
    auto source = std::make_unique<node::CallbackFrameSource>(
        [camera]() -> std::optional<tactile::TactileImage> { return camera->capture(); });
    node::SensorNode::Clock clock;
    if (options_.lockstep) clock = [&p = plant_] { return p.clock_ms(); };
    nodes_[n] = std::make_unique<node::SensorNode>(cfg, std::move(source), clock);
    nodes_[n]->start(!options_.lockstep);
  }
  if (options_.lockstep) {
    plant_.set_capture_hook([this](std::size_t n) { nodes_[n]->capture_once(); });
  }
}

LocalSensorRig::~LocalSensorRig() {
  if (options_.lockstep) plant_.set_capture_hook({});
  for (auto& n : nodes_) n->stop();
}

hub::HubConfig LocalSensorRig::hub_config() const {
  hub::HubConfig cfg;
  for (std::size_t n = 0; n < nodes_.size(); ++n) cfg.endpoints[n] = nodes_[n]->endpoint();
  cfg.contact_threshold = options_.contact_threshold;
  cfg.stale_after_ms = 2.0 * options_.capture_period_ms;
  if (options_.lockstep) {
    // Every node answers each poll, however the scheduler treats the node threads.
    cfg.poll_timeout_ms = 2000.0;
  }
  return cfg;
}

}  // namespace softgrasp::harness
