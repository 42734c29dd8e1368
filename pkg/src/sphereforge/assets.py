"""Synthetic robots used by the tests, the benchmark and the README."""

import os
from importlib import resources

from .geometry.meshio import save_obj
from .geometry.shapes import capsule

# (name, radius, length, collision origin z); 100 segments x 25 cap rings
# gives exactly 10 000 faces per link
ARM_LINKS = (
    ("base", 0.08, 0.10, 0.07),
    ("upper_arm", 0.05, 0.40, 0.25),
    ("forearm", 0.04, 0.35, 0.20),
)
ARM_SEGMENTS = 100
ARM_CAP_RINGS = 25

_ARM_URDF = """<?xml version="1.0"?>
<robot name="{name}">
  <!-- three-link arm with 10k-face capsule links -->
  <link name="base">
    <inertial>
      <mass value="2.0"/>
      <inertia ixx="0.01" ixy="0" ixz="0" iyy="0.01" iyz="0" izz="0.01"/>
    </inertial>
    <visual>
      <origin xyz="0 0 0.07"/>
      <geometry><mesh filename="{prefix}base.obj"/></geometry>
    </visual>
    <collision>
      <origin xyz="0 0 0.07"/>
      <geometry><mesh filename="{prefix}base.obj"/></geometry>
    </collision>
  </link>
  <link name="upper_arm">
    <collision>
      <origin xyz="0 0 0.25"/>
      <geometry><mesh filename="{prefix}upper_arm.obj"/></geometry>
    </collision>
  </link>
  <link name="forearm">
    <collision>
      <origin xyz="0 0 0.2"/>
      <geometry><mesh filename="{prefix}forearm.obj"/></geometry>
    </collision>
  </link>
  <joint name="shoulder_yaw" type="revolute">
    <parent link="base"/>
    <child link="upper_arm"/>
    <origin xyz="0 0 0.15" rpy="0 0 0"/>
    <axis xyz="0 0 1"/>
    <limit lower="-3.14159" upper="3.14159" effort="10" velocity="1"/>
  </joint>
  <joint name="elbow" type="revolute">
    <parent link="upper_arm"/>
    <child link="forearm"/>
    <origin xyz="0 0 0.5" rpy="0 0 0"/>
    <axis xyz="0 1 0"/>
    <limit lower="-2.0" upper="2.0" effort="10" velocity="1"/>
  </joint>
</robot>
"""


def arm_meshes():
    return {name: capsule(r, length, ARM_SEGMENTS, ARM_CAP_RINGS) for name, r, length, _ in ARM_LINKS}


def write_test_arm(directory, name="test_arm", package=None):
    """Write the arm's URDF and OBJ meshes under ``directory``.

    Meshes go to ``directory/meshes``. With ``package`` the URDF refers to
    them as ``package://<package>/meshes/...``; otherwise by relative path.
    Returns the URDF path.
    """
    mesh_dir = os.path.join(directory, "meshes")
    os.makedirs(mesh_dir, exist_ok=True)
    for link, mesh in arm_meshes().items():
        save_obj(mesh, os.path.join(mesh_dir, f"{link}.obj"))
    prefix = f"package://{package}/meshes/" if package else "meshes/"
    path = os.path.join(directory, f"{name}.urdf")
    with open(path, "w") as fh:
        fh.write(_ARM_URDF.format(name=name, prefix=prefix))
    return path


def test_robot_path():
    """The bundled copy of the arm shipped with the package."""
    return str(resources.files("sphereforge") / "data" / "test_robot" / "test_arm.urdf")
