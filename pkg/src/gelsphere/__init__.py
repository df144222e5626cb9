"""gelsphere: virtual spherical tactile sensor and surface reconstruction.

Subpackages:
  core      shared data types, SE(2) math, Poisson integrator, contact mask
  kernels   numba-accelerated hot loops with a pure-numpy fallback
  sim       virtual sensor: scenes, contact geometry, photometric rendering
  calib     photometric-stereo calibration (gradient regressor)
  mapper    tactile SLAM: odometry, loop closure, pose graph, fusion, meshes
  force     contact normal-force estimation
  streamio  framed wire protocol, recordings, stream server/client
  evalkit   accuracy and drift metrics, report emission
  service   live scan session server (WebSocket + HTTP)
"""

__version__ = "0.1.0"
