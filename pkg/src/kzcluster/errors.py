"""Exception types raised by the clustering engine."""


class KzClusterError(Exception):
    """Base class for all library errors."""


# graph construction / traversal
class SelfLoop(KzClusterError):
    pass


class NegativeWeight(KzClusterError):
    pass


class DisconnectedGraph(KzClusterError):
    pass


class SingletonGraph(KzClusterError):
    pass


class EmptySources(KzClusterError):
    pass


# oracle
class EmptyCenters(KzClusterError):
    pass


class InstanceTooLarge(KzClusterError):
    pass


class InvalidSwap(KzClusterError):
    pass


# preprocessing
class InvalidK(KzClusterError):
    pass


class InvalidEpsilon(KzClusterError):
    pass


# cluster state
class AlreadyCenter(KzClusterError):
    pass


class NotACenter(KzClusterError):
    pass


class WouldEmptyCenters(KzClusterError):
    pass


class ZeroCost(KzClusterError):
    pass


class TokenOrderViolation(KzClusterError):
    pass


# local search
class EpsilonOutOfRange(KzClusterError):
    pass


class IterationCapExceeded(KzClusterError):
    pass


# spanner
class ScaleOutOfRange(KzClusterError):
    pass


class DegenerateDataset(KzClusterError):
    pass
