#pragma once

#include <string_view>

// Bundled stop lists in the stop-list file format: one term per line, `#`
// comments, a trailing `=` marks a prefix pattern.

namespace urbent::stopwords_data {

inline constexpr std::string_view kDomain = R"(# platform-generated tags
instagram_id=
foursquare_id=
facebook_id=
flickr_mobile
geotagged
foursquare:venue=
geo:lat=
geo:lon=
uploaded:by=instagram
instagramapp
iphoneography
squareformat
)";

inline constexpr std::string_view kEnglish = R"(# English function words
a
about
above
after
again
against
all
am
an
and
any
are
as
at
be
because
been
before
being
below
between
both
but
by
can
could
did
do
does
doing
down
during
each
few
for
from
further
had
has
have
having
he
her
here
hers
herself
him
himself
his
how
i
if
in
into
is
it
its
itself
just
me
more
most
my
myself
no
nor
not
now
of
off
on
once
only
or
other
our
ours
ourselves
out
over
own
same
she
should
so
some
such
than
that
the
their
theirs
them
themselves
then
there
these
they
this
those
through
to
too
under
until
up
very
was
we
were
what
when
where
which
while
who
whom
why
will
with
would
you
your
yours
yourself
yourselves
)";

inline constexpr std::string_view kItalian = R"(# Italian function words
a
ad
al
alla
alle
allo
agli
ai
anche
che
chi
ci
col
come
con
contro
cui
da
dal
dalla
dalle
dallo
dagli
dai
degli
dei
del
della
delle
dello
di
dove
e
è
ed
era
essere
fra
gli
ha
hanno
ho
i
il
in
io
la
le
lei
li
lo
loro
lui
ma
mi
mia
mio
ne
negli
nei
nel
nella
nelle
nello
noi
non
nostra
nostro
o
ogni
per
perché
più
poi
quale
quando
quella
quello
questa
questo
se
sei
si
sia
sono
sotto
su
sua
sue
sugli
sui
sul
sulla
sulle
sullo
suo
tra
tu
tua
tuo
tutti
tutto
un
una
uno
voi
)";

}  // namespace urbent::stopwords_data
