#include "pilotrt/resource.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "pilotrt/clock.hpp"
#include "pilotrt/errors.hpp"

namespace pilotrt {

using json = nlohmann::ordered_json;

void ResourceConfig::validate() const {
  if (resource_id.empty())
    throw InvalidDescription("resource_id must be non-empty");
  if (nodes < 1 || cores_per_node < 1)
    throw InvalidDescription("resource needs nodes >= 1 and cores >= 1");
  if (topology.kind == TopologyKind::Torus) {
    if (topology.dims.empty())
      throw InvalidDescription("torus topology needs dims");
    long prod = 1;
    for (int d : topology.dims) {
      if (d < 1) throw InvalidDescription("torus dims must be positive");
      prod *= d;
    }
    if (prod != nodes)
      throw InvalidDescription("product(torus dims) must equal node count");
  }
  if (executors < 1 || stagers < 1)
    throw InvalidDescription("agent layout needs executors >= 1, stagers >= 1");
}

ResourceConfig ResourceConfig::from_json_text(const std::string& text) {
  json j = json::parse(text);
  ResourceConfig c;
  c.resource_id = j.at("resource_id").get<std::string>();
  c.nodes = j.at("nodes").get<int>();
  c.cores_per_node = j.at("cores_per_node").get<int>();
  if (j.contains("topology")) {
    const auto& t = j["topology"];
    std::string kind = t.value("kind", "continuum");
    if (kind == "torus") {
      c.topology.kind = TopologyKind::Torus;
      c.topology.dims = t.at("dims").get<std::vector<int>>();
    } else if (kind == "continuum") {
      c.topology.kind = TopologyKind::Continuum;
    } else {
      throw InvalidDescription("unknown topology kind: " + kind);
    }
  }
  if (j.contains("launch_methods")) {
    const auto& lm = j["launch_methods"];
    auto parse = [](const std::string& s) {
      auto m = launch_method_from_string(s);
      if (!m) throw InvalidDescription("unknown launch method: " + s);
      return *m;
    };
    c.mpi_like = parse(lm.value("mpi_like", "FORK"));
    c.serial = parse(lm.value("serial", "FORK"));
  }
  if (j.contains("spawner")) {
    auto s = spawn_mechanism_from_string(j["spawner"].get<std::string>());
    if (!s)
      throw InvalidDescription("unknown spawner: " +
                               j["spawner"].get<std::string>());
    c.spawner = *s;
  }
  if (j.contains("agent_layout")) {
    const auto& al = j["agent_layout"];
    c.executors = al.value("executors", 1);
    c.stagers = al.value("stagers", 1);
  }
  c.validate();
  return c;
}

ResourceConfig ResourceConfig::from_json_file(
    const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in)
    throw InvalidDescription("cannot read resource config: " + file.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_text(text);
}

std::string ResourceConfig::to_json_text() const {
  json j;
  j["resource_id"] = resource_id;
  j["nodes"] = nodes;
  j["cores_per_node"] = cores_per_node;
  j["topology"]["kind"] =
      topology.kind == TopologyKind::Torus ? "torus" : "continuum";
  if (topology.kind == TopologyKind::Torus) j["topology"]["dims"] =
      topology.dims;
  j["launch_methods"]["mpi_like"] = std::string(to_string(mpi_like));
  j["launch_methods"]["serial"] = std::string(to_string(serial));
  j["spawner"] = std::string(to_string(spawner));
  j["agent_layout"]["executors"] = executors;
  j["agent_layout"]["stagers"] = stagers;
  return j.dump(2) + "\n";
}

ResourceConfig ResourceConfig::builtin(std::string_view name) {
  ResourceConfig c;
  if (name == "local") {
    // Desk-scale default: 16 virtual cores on two nodes.
    c.resource_id = "local";
    c.nodes = 2;
    c.cores_per_node = 8;
    c.executors = 2;
  } else if (name == "comet") {
    c.resource_id = "comet";
    c.nodes = 4;
    c.cores_per_node = 24;
    c.executors = 2;
  } else if (name == "stampede") {
    c.resource_id = "stampede";
    c.nodes = 8;
    c.cores_per_node = 16;
    c.serial = LaunchMethodId::SHELL_WRAPPER;
    c.mpi_like = LaunchMethodId::SHELL_WRAPPER;
    c.executors = 2;
  } else if (name == "bluewaters") {
    c.resource_id = "bluewaters";
    c.nodes = 4;
    c.cores_per_node = 32;
    c.spawner = SpawnMechanism::Shell;
    c.executors = 2;
  } else {
    throw InvalidDescription("unknown builtin resource: " + std::string(name));
  }
  return c;
}

std::vector<std::string> ResourceConfig::builtin_names() {
  return {"local", "comet", "stampede", "bluewaters"};
}

ResourceConfig ResourceConfig::resolve(const std::string& name_or_path) {
  for (const auto& n : builtin_names())
    if (n == name_or_path) return builtin(n);
  return from_json_file(name_or_path);
}

namespace {

std::string node_id_for(const ResourceConfig& config, int index,
                        const std::vector<std::vector<int>>& coords) {
  if (config.topology.kind == TopologyKind::Torus) {
    std::string id = "node";
    for (int c : coords[index]) id += "-" + std::to_string(c);
    return id;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "node-%04d", index);
  return buf;
}

std::vector<std::vector<int>> torus_coords(const Topology& topo, int nodes) {
  std::vector<std::vector<int>> coords;
  if (topo.kind != TopologyKind::Torus) return coords;
  coords.reserve(nodes);
  std::vector<int> cur(topo.dims.size(), 0);
  for (int n = 0; n < nodes; ++n) {
    coords.push_back(cur);
    for (int d = static_cast<int>(topo.dims.size()) - 1; d >= 0; --d) {
      if (++cur[d] < topo.dims[d]) break;
      cur[d] = 0;
    }
  }
  return coords;
}

}  // namespace

ResourceManager::ResourceManager(ResourceConfig config)
    : config_(std::move(config)) {
  config_.validate();
  node_coords_ = torus_coords(config_.topology, config_.nodes);
  for (int i = 0; i < config_.nodes; ++i) free_nodes_.insert(i);
  notifier_ = std::thread([this] { notifier_loop(); });
}

ResourceManager::~ResourceManager() {
  {
    std::lock_guard<std::mutex> lk(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  if (notifier_.joinable()) notifier_.join();
}

std::string ResourceManager::submit_pilot_job(const PilotDescription& desc,
                                              Callbacks callbacks) {
  validate(desc);
  if (desc.cores > config_.total_cores())
    throw CapacityExceeded("pilot wants " + std::to_string(desc.cores) +
                           " cores, resource has " +
                           std::to_string(config_.total_cores()));
  std::lock_guard<std::mutex> lk(mu_);
  Job job;
  job.handle = config_.resource_id + ".job." + std::to_string(next_handle_++);
  job.desc = desc;
  job.callbacks = std::move(callbacks);
  job.nodes_needed =
      (desc.cores + config_.cores_per_node - 1) / config_.cores_per_node;
  std::string handle = job.handle;
  jobs_.emplace(handle, std::move(job));
  queue_.push_back(handle);
  cv_.notify_all();
  return handle;
}

void ResourceManager::release_pilot_job(const std::string& handle) {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = jobs_.find(handle);
  if (it == jobs_.end()) throw UnknownHandle("no such pilot job: " + handle);
  if (it->second.state == JobState::Ended) return;
  end_job_locked(it->second);
  cv_.notify_all();
}

NodeLayout ResourceManager::query_layout(const std::string& handle) const {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = jobs_.find(handle);
  if (it == jobs_.end()) throw UnknownHandle("no such pilot job: " + handle);
  if (it->second.state != JobState::Active)
    throw NotActive("pilot job not active: " + handle);
  return layout_for_locked(it->second);
}

int ResourceManager::free_nodes() const {
  std::lock_guard<std::mutex> lk(mu_);
  return static_cast<int>(free_nodes_.size());
}

NodeLayout ResourceManager::layout_for_locked(const Job& job) const {
  NodeLayout layout;
  layout.cores_per_node = config_.cores_per_node;
  layout.topology = config_.topology;
  for (int idx : job.node_indices) {
    layout.node_ids.push_back(node_id_for(config_, idx, node_coords_));
    if (config_.topology.kind == TopologyKind::Torus)
      layout.coords.push_back(node_coords_[idx]);
  }
  return layout;
}

void ResourceManager::end_job_locked(Job& job) {
  if (job.state == JobState::Active) {
    for (int idx : job.node_indices) free_nodes_.insert(idx);
  } else {
    // Still queued: drop it from the FIFO.
    for (auto it = queue_.begin(); it != queue_.end(); ++it) {
      if (*it == job.handle) {
        queue_.erase(it);
        break;
      }
    }
  }
  job.state = JobState::Ended;
}

// Activate queued jobs in FIFO order while the head fits. Whole-node grant:
// a pilot never shares a node.
void ResourceManager::activate_ready_locked(
    std::vector<std::function<void()>>& fired) {
  while (!queue_.empty()) {
    Job& job = jobs_.at(queue_.front());
    if (job.nodes_needed > static_cast<int>(free_nodes_.size())) break;
    queue_.pop_front();
    for (int i = 0; i < job.nodes_needed; ++i) {
      job.node_indices.push_back(*free_nodes_.begin());
      free_nodes_.erase(free_nodes_.begin());
    }
    job.state = JobState::Active;
    job.deadline_us =
        Clock::mono_us() + static_cast<int64_t>(job.desc.runtime_s * 1e6);
    if (job.callbacks.on_active) {
      auto cb = job.callbacks.on_active;
      auto handle = job.handle;
      auto layout = layout_for_locked(job);
      fired.push_back([cb, handle, layout] { cb(handle, layout); });
    }
  }
}

void ResourceManager::notifier_loop() {
  std::unique_lock<std::mutex> lk(mu_);
  while (!stop_) {
    std::vector<std::function<void()>> fired;
    activate_ready_locked(fired);

    // Expire active jobs whose duration ran out.
    int64_t now = Clock::mono_us();
    int64_t next_deadline = INT64_MAX;
    for (auto& [handle, job] : jobs_) {
      if (job.state != JobState::Active) continue;
      if (job.deadline_us <= now) {
        end_job_locked(job);
        if (job.callbacks.on_done) {
          auto cb = job.callbacks.on_done;
          auto h = job.handle;
          fired.push_back([cb, h] { cb(h); });
        }
      } else {
        next_deadline = std::min(next_deadline, job.deadline_us);
      }
    }

    if (!fired.empty()) {
      // Callbacks run without the lock; submitters may race them.
      lk.unlock();
      for (auto& f : fired) f();
      lk.lock();
      continue;
    }

    if (next_deadline == INT64_MAX) {
      cv_.wait(lk);
    } else {
      cv_.wait_for(lk, std::chrono::microseconds(next_deadline - now));
    }
  }
}

}  // namespace pilotrt
