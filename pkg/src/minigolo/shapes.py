"""Hidden-class shapes for dynamic objects.

A shape maps property names to slot indices.  Shapes never change; adding a
property follows (or creates, once) a cached transition to a successor, so
objects built by the same sequence of definitions end up on the very same
shape object and dispatch can key on ``shape.id``.
"""


class Shape:
    __slots__ = ("id", "properties", "transitions", "parent")

    def __init__(self, shape_id, properties, parent=None):
        self.id = shape_id
        self.properties = properties  # name -> slot, insertion ordered
        self.transitions = {}
        self.parent = parent

    def __repr__(self):
        return f"Shape#{self.id}({', '.join(self.properties)})"


class ShapeTree:
    """Owns the root shape and hands out ids; one per engine instance."""

    def __init__(self):
        self._next_id = 0
        self.root = self._new({}, None)

    def _new(self, properties, parent):
        shape = Shape(self._next_id, properties, parent)
        self._next_id += 1
        return shape

    @property
    def shape_count(self):
        return self._next_id

    def define(self, shape, name):
        if name in shape.properties:
            return shape
        nxt = shape.transitions.get(name)
        if nxt is None:
            props = dict(shape.properties)
            props[name] = len(props)
            nxt = self._new(props, shape)
            shape.transitions[name] = nxt
        return nxt


def shape_define(tree, shape, name):
    return tree.define(shape, name)
