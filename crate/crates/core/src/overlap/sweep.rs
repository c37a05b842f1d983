use crate::numeric::AlgebraicNumber;

type Interval = (AlgebraicNumber, AlgebraicNumber);

/// Largest number of boxes sharing a point.
///
/// `open[c]` selects open intervals on coordinate `c` (interior overlap);
/// otherwise intervals are closed (touching counts).
pub fn max_cover(boxes: &[&[Interval]], open: &[bool]) -> usize {
    cover_from(boxes, 0, open)
}

fn cover_from(boxes: &[&[Interval]], coord: usize, open: &[bool]) -> usize {
    if boxes.is_empty() {
        return 0;
    }
    if coord == open.len() {
        return boxes.len();
    }
    let mut order: Vec<&[Interval]> = boxes.to_vec();
    order.sort_by(|a, b| a[coord].0.cmp(&b[coord].0));
    let mut active: Vec<&[Interval]> = Vec::new();
    let mut best = 0;
    let mut i = 0;
    while i < order.len() {
        let x = &order[i][coord].0;
        let mut j = i;
        while j < order.len() && &order[j][coord].0 == x {
            active.push(order[j]);
            j += 1;
        }
        // candidate point: x itself (closed) or just to its right (open)
        active.retain(|b| if open[coord] { &b[coord].1 > x } else { &b[coord].1 >= x });
        if active.len() > best {
            best = best.max(cover_from(&active, coord + 1, open));
        }
        i = j;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::NumberField;

    fn iv(a: &str, b: &str) -> Interval {
        let f = NumberField::rationals();
        (AlgebraicNumber::parse(&f, a).unwrap(), AlgebraicNumber::parse(&f, b).unwrap())
    }

    #[test]
    fn intervals() {
        let b = [vec![iv("0", "1/2")], vec![iv("1/2", "1")], vec![iv("1/4", "3/4")]];
        let refs: Vec<&[Interval]> = b.iter().map(|v| v.as_slice()).collect();
        assert_eq!(max_cover(&refs, &[true]), 2);
        assert_eq!(max_cover(&refs, &[false]), 3);
    }

    #[test]
    fn squares() {
        // three unit squares meeting only at corners / edges
        let b = [
            vec![iv("0", "1"), iv("0", "1")],
            vec![iv("1", "2"), iv("0", "1")],
            vec![iv("0", "1"), iv("1", "2")],
            vec![iv("1", "2"), iv("1", "2")],
        ];
        let refs: Vec<&[Interval]> = b.iter().map(|v| v.as_slice()).collect();
        assert_eq!(max_cover(&refs, &[true, true]), 1);
        assert_eq!(max_cover(&refs, &[false, false]), 4);
    }
}
