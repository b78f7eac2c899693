"""Exception types shared by the package."""


class MatchlabError(Exception):
    pass


class InvalidWindow(MatchlabError):
    pass


class InvalidParameter(MatchlabError):
    pass


class InvalidInput(MatchlabError):
    pass


class OriginOccupied(MatchlabError):
    pass


class TooLarge(MatchlabError):
    pass


class WindowTooSmall(MatchlabError):
    pass


class OutOfRange(MatchlabError):
    pass


class InvalidLength(MatchlabError):
    pass


class WrongKind(MatchlabError):
    pass


class InvalidPair(MatchlabError):
    pass


class InvalidMatching(MatchlabError):
    pass


class DegenerateDistances(MatchlabError):
    pass
