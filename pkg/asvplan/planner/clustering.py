#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..common.util import wrap_deg
from ..topology import cpa_metrics


@dataclass(frozen=True)
class ClusterSet:
    """Partition of obstacle ids; clusters ordered by their smallest id"""

    clusters: tuple = field(default_factory=tuple)

    def __len__(self):
        return len(self.clusters)

    def __iter__(self):
        return iter(self.clusters)

    def ids(self):
        return [obstacle_id for cluster in self.clusters for obstacle_id in cluster]

    def cluster_of(self, obstacle_id):
        for index, cluster in enumerate(self.clusters):
            if obstacle_id in cluster:
                return index
        raise KeyError(obstacle_id)

    @classmethod
    def singletons(cls, obstacle_ids):
        return cls(tuple((obstacle_id,) for obstacle_id in sorted(obstacle_ids)))


def cluster_obstacles(obstacles, ego, tau_t=30.0, tau_d=20.0, tau_b=30.0):
    """
    Single-linkage clustering of obstacles with similar motion relative to
    the ego: two obstacles link when their TCPA, DCPA and relative bearing
    differ by at most tau_t seconds, tau_d meters and tau_b degrees.
    """
    obstacles = sorted(obstacles, key=lambda obs: str(obs.id))
    if not obstacles:
        return ClusterSet()
    metrics = [cpa_metrics(ego, obs) for obs in obstacles]
    tcpa = np.array([m.tcpa for m in metrics])
    dcpa = np.array([m.dcpa for m in metrics])
    bearing = np.array([m.rel_bearing for m in metrics])

    linked = (
        (np.abs(tcpa[:, None] - tcpa[None, :]) <= tau_t)
        & (np.abs(dcpa[:, None] - dcpa[None, :]) <= tau_d)
        & (np.abs(wrap_deg(bearing[:, None] - bearing[None, :])) <= tau_b)
    )
    _, labels = connected_components(csr_matrix(linked), directed=False)

    clusters = {}
    for obs, label in zip(obstacles, labels):
        clusters.setdefault(int(label), []).append(obs.id)
    ordered = sorted((tuple(members) for members in clusters.values()), key=lambda c: str(c[0]))
    return ClusterSet(tuple(ordered))
