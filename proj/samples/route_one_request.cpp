// Routes a handful of requests on NSF-14 with the library API and prints the
// chosen lightpaths.

#include <iostream>

#include "drwa/drwa.hpp"

int main() {
  const drwa::Topology topo = drwa::nsf14();
  drwa::WavelengthDatabase db(topo.link_count(), 8);

  drwa::EpConfig cfg;
  cfg.seed = 42;
  drwa::EpRouter router(topo, cfg, drwa::AssignmentStrategy::round_robin());

  drwa::TrafficConfig traffic;
  traffic.request_count = 5;
  traffic.seed = 7;
  for (const auto& req : drwa::generate_requests(traffic, topo)) {
    const auto d = router.route_request(req, db);
    std::cout << "request " << req.id << " " << req.source.index << " -> " << req.destination.index;
    if (!d.accepted) {
      std::cout << ": blocked\n";
      continue;
    }
    std::cout << ": path";
    for (auto n : d.best.genes) std::cout << " " << n.index;
    std::cout << ", wavelength " << *d.best.wavelength << ", fitness " << d.best.fitness << ", "
              << d.fitness_evaluations << " evaluations\n";
  }
}
