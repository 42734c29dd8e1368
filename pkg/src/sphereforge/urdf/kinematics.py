"""Forward kinematics over the joint tree."""

import hashlib

import numpy as np

from ..errors import LimitViolation, UnknownJoint
from .pose import Pose, axis_angle

LIMIT_SLACK = 1e-12


def _motion(joint, value):
    m = np.eye(4)
    if joint.kind in ("revolute", "continuous"):
        m[:3, :3] = axis_angle(joint.axis, value)
    elif joint.kind == "prismatic":
        m[:3, 3] = value * np.asarray(joint.axis)
    return m


def _check(model, q):
    joints = model.joint_map
    for name in q:
        if name not in joints:
            raise UnknownJoint(f"no joint named {name!r}")
    for name, value in q.items():
        j = joints[name]
        if j.limits is not None:
            lo, hi = j.limits
            if not lo - LIMIT_SLACK <= value <= hi + LIMIT_SLACK:
                raise LimitViolation(f"joint {name!r}: {value} outside [{lo}, {hi}]")


def link_matrices(model, q=None):
    """World transform (4x4) of every link; unspecified joints sit at 0."""
    q = dict(q or {})
    _check(model, q)
    out = {model.root_link: np.eye(4)}
    stack = [model.root_link]
    children = {}
    for j in model.joints:
        children.setdefault(j.parent, []).append(j)
    while stack:
        parent = stack.pop()
        for j in children.get(parent, ()):
            value = float(q.get(j.name, 0.0))
            out[j.child] = out[parent] @ j.origin.matrix @ _motion(j, value)
            stack.append(j.child)
    return {name: out[name] for name in model.links}


def forward_kinematics(model, q=None):
    """Pose of every link in the root frame."""
    return {name: Pose.from_matrix(m) for name, m in link_matrices(model, q).items()}


def movable_joints(model):
    return [j for j in model.joints if j.movable]


def random_configuration(model, rng):
    """Uniform draw inside each movable joint's range."""
    return {j.name: float(rng.uniform(*j.sample_range())) for j in movable_joints(model)}


def config_hash(q):
    """Short stable digest of a configuration, for per-query logs."""
    text = ";".join(f"{k}={float(v).hex()}" for k, v in sorted(q.items()))
    return hashlib.sha1(text.encode()).hexdigest()[:16]
