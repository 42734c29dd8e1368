"""Exception hierarchy. Missing files surface as the builtin
``FileNotFoundError`` and write failures as ``OSError``."""


class SphereForgeError(Exception):
    """Base class for all library errors."""


class UnsupportedFormat(SphereForgeError):
    pass


class MalformedMesh(SphereForgeError):
    pass


class DegenerateMesh(SphereForgeError):
    pass


class NotWatertight(SphereForgeError):
    pass


class NoConvergence(SphereForgeError):
    pass


class EmptyResult(SphereForgeError):
    pass


class SpherizationFailed(SphereForgeError):
    pass


class XmlError(SphereForgeError):
    pass


class KinematicLoop(SphereForgeError):
    pass


class MissingLink(SphereForgeError):
    pass


class UnsupportedJoint(SphereForgeError):
    pass


class MeshNotFound(SphereForgeError):
    """Raised with every unresolvable mesh reference at once."""

    def __init__(self, missing):
        self.missing = list(missing)
        lines = "\n".join(f"  {link}: {uri}" for link, uri in self.missing)
        super().__init__(f"{len(self.missing)} mesh reference(s) could not be resolved:\n{lines}")


class UnknownLink(SphereForgeError):
    pass


class UnknownJoint(SphereForgeError):
    pass


class LimitViolation(SphereForgeError):
    pass


class StructureMismatch(SphereForgeError):
    pass
