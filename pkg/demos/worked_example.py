# Five-node walk-through: one source, three relays, one destination.
import anypath as ap

g = ap.worked_example_graph()
r = g.rates[0]
src, relays, dst = ap.fixtures.SOURCE, ap.fixtures.RELAYS, ap.fixtures.DESTINATION
print(g)

table = ap.shortest_anypath_first(g, dst, r)
print(table.summary())

D = table.cost
for J in ([relays[0]], relays[:2], relays):
    J = list(J)
    p = ap.hyperlink_delivery_ratio(src, J, r, g)
    d = ap.hyperlink_cost(src, J, r, g)
    w = ap.relay_weights(src, J, r, g)
    rest = ap.remaining_cost(w, [D[j] for j in J])
    print(f"via {J}: p={p:.4f}  d={d:.4f}  weights={w.round(4)}  remaining={rest:.4f}  total={d + rest:.4f}")

# the third relay is costlier than the cost through the first two, so it hurts
p2 = ap.hyperlink_delivery_ratio(src, relays[:2], r, g)
p3 = ap.hyperlink_delivery_ratio(src, relays, r, g)
print("constant-time update when adding the third relay:",
      round(ap.incremental_update(D[src], p2, p3, D[relays[2]]), 4))
