//! Schema texts shared by the unit tests.

pub const HOSPITAL_A: &str = "SCHEMA HospitalA ;
    DOMAINS names = UNBOUNDED ;
    OBJECT TYPES Patient ;
    VALUE TYPES PatientName : names ;
    RELATIONSHIP TYPES
      has-name = [ Patient : has-name-1, PatientName : has-name-2 ] ;
      smokes = [ Patient : smokes-1 ] ;
      drinks = [ Patient : drinks-1 ] ;
    CONSTRAINTS
      n1 : UNIQUE { has-name-1 } ;
      n2 : MANDATORY { has-name-1 } ;
    END";

/// One entity identified by a natural number, with exactly one instance.
pub const GEN_ORM: &str = "SCHEMA GenOrm ;
    DOMAINS nat = { 1, 2, 3 } ;
    OBJECT TYPES Number ;
    VALUE TYPES Nat : nat ;
    RELATIONSHIP TYPES Number.Nat = [ Number : Number.Nat-1, Nat : Number.Nat-2 ] ;
    CONSTRAINTS
      r1 : UNIQUE { Number.Nat-1 } ;
      r2 : UNIQUE { Number.Nat-2 } ;
      r3 : MANDATORY { Number.Nat-1 } ;
      r4 : CARDINALITY Number = 1 ;
    END";

pub const OLYMPICS_B: &str = "SCHEMA OlympicsB ;
    DOMAINS nat = UNBOUNDED ;
    OBJECT TYPES Country ;
    VALUE TYPES Quantity : nat ;
    RELATIONSHIP TYPES
      won-gold-in = [ Country : won-gold-in-1, Quantity : won-gold-in-2 ] ;
      won-silver-in = [ Country : won-silver-in-1, Quantity : won-silver-in-2 ] ;
      won-bronze-in = [ Country : won-bronze-in-1, Quantity : won-bronze-in-2 ] ;
    CONSTRAINTS
      u1 : UNIQUE { won-gold-in-1 } ;
      u2 : UNIQUE { won-silver-in-1 } ;
      u3 : UNIQUE { won-bronze-in-1 } ;
    END";

pub const OT_EMISSION: &str = "Transformation schema OTEmission (x!n, (r!n)!m, s!n, t, y, u, v, l, d, i!m);
      Object types:
        x!n, y, l;
      Value types:
        l: d;
      Relationship types:
        (f = [(x:r)!n])!m,
        g = [(x:s)!n, y:t],
        h = [y:u, l:v];
      Constraints:
        c1: UNIQUE {u};
        c2: UNIQUE {v};
        c3: MANDATORY {v};
        c4: EACH y IS IN i!m;
      From:
        f!m;
      To:
        y, l, d, h, g, c1, c2, c3, c4;
      Derivation rules:
        (f = PROJ[(r=s)!n] SEL[t = u, v = i] g JOIN h)!m;
      Update rules:
        g = UNION OF (PROJ[(s=r)!n, t=Val(y,i)] f)!m,
        h = {<u=Val(y,i), v=i>!m};
    End Transformation schema.";

pub const OLYMPICS_LIST: &str = "OTEmission([Country, Quantity],
      [[won-gold-in-1, won-gold-in-2], [won-silver-in-1, won-silver-in-2], [won-bronze-in-1, won-bronze-in-2]],
      [won-medals-of-in-1, won-medals-of-in-3], won-medals-of-in-2, MedalKind, MedalKind.code-1, MedalKind.code-2,
      code, char, ['G', 'S', 'B'])";
